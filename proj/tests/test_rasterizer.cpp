// SPDX-License-Identifier: Apache-2.0
//
// rrf - radio radiance field toolkit
// Copyright (C) 2026 The rrf authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "rrf/parallel.hpp"
#include "rrf/random.hpp"
#include "rrf/rasterizer.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace rrf;

namespace
{
    ProjectedGaussian<double> splat(double x, double y, double sigma, double alpha, double depth, std::uint32_t index,
                                    double value = 1.0)
    {
        ProjectedGaussian<double> p;
        p.mean2d = {x, y};
        p.cov2d = {sigma * sigma, 0.0, sigma * sigma};
        p.conic = {1.0 / (sigma * sigma), 0.0, 1.0 / (sigma * sigma)};
        p.extent = {3.0 * sigma, 3.0 * sigma};
        p.alpha = alpha;
        p.depth = depth;
        p.index = index;
        p.values = {value, 2.0 * value, 0.5 * value};
        return p;
    }

    // Random depth-sorted list of primitives that all cover pixel (4, 4)
    std::vector<ProjectedGaussian<double>> random_list(Rng &rng, int n)
    {
        std::vector<ProjectedGaussian<double>> v;
        for (int i = 0; i < n; ++i)
        {
            auto p = splat(4.5 + rng.uniform(-2, 2), 4.5 + rng.uniform(-2, 2), rng.uniform(0.5, 3.0),
                           rng.uniform(0.01, 0.99), double(i), std::uint32_t(i), rng.uniform(0, 1));
            p.values = {rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)};
            v.push_back(p);
        }
        return v;
    }

    GaussianPrimitive<double> isotropic(const Vec3<double> &pos, double sigma, double alpha)
    {
        GaussianPrimitive<double> g;
        g.position = pos;
        g.log_scale = {std::log(sigma), std::log(sigma), std::log(sigma)};
        g.opacity_logit = logit(alpha);
        g.coeff(kVisual, 0) = sh_dc_for_value(0.7);
        g.coeff(kGain, 0) = sh_dc_for_value(1.5);
        g.coeff(kTof, 0) = sh_dc_for_value(0.2);
        return g;
    }

    PinholeCamera axis_camera(int res)
    {
        PinholeCamera cam;
        cam.resolution = res;
        cam.fov = kPi / 2.0;
        return cam; // At the origin looking along world +z
    }

    RRFModel random_scene_model(int n, std::uint64_t seed)
    {
        Scene s = make_box_scene({5, 4, 3}, {1.3, 1.1, 2.1});
        InitOptions io;
        io.initial_alpha = 0.4;
        RRFModel m = init_model(s, n, n / 10, seed, io);
        Rng rng(seed);
        for (auto &g : m.gaussians)
            for (int c = 0; c < kNumChannels; ++c)
                for (int k = 0; k < 9; ++k)
                    g.coeff(c, k) = float(rng.uniform(-0.5, 1.0));
        return m;
    }
} // namespace

TEST_CASE("on-axis projection")
{
    const int res = 64;
    auto cam = CameraFrame<double>::from(axis_camera(res));
    const double f = 0.5 * res / std::tan(kPi / 4.0);
    for (double z : {2.0, 4.0})
    {
        auto p = project(isotropic({0, 0, z}, 0.05, 0.5), 2, cam);
        REQUIRE(p.has_value());
        CHECK(p->mean2d.x == doctest::Approx(res / 2.0));
        CHECK(p->mean2d.y == doctest::Approx(res / 2.0));
        double s2 = (f * 0.05 / z) * (f * 0.05 / z);
        CHECK(p->cov2d.a == doctest::Approx(s2 + 0.3).epsilon(1e-9));
        CHECK(p->cov2d.c == doctest::Approx(s2 + 0.3).epsilon(1e-9));
        CHECK(p->cov2d.b == doctest::Approx(0.0).scale(1.0));
        CHECK(p->depth == doctest::Approx(z));
        // Mass-preserving alpha rescale
        CHECK(p->alpha == doctest::Approx(0.5 * s2 / (s2 + 0.3)).epsilon(1e-9));
        CHECK(p->values[kGain] == doctest::Approx(1.5));
    }
    CHECK_FALSE(project(isotropic({0, 0, 0.005}, 0.001, 0.5), 2, cam).has_value());
    CHECK_FALSE(project(isotropic({0, 0, -1}, 0.05, 0.5), 2, cam).has_value());
    CHECK_FALSE(project(isotropic({10, 0, 1}, 0.05, 0.5), 2, cam).has_value());
}

TEST_CASE("projected sigma scales with inverse depth")
{
    auto cam = CameraFrame<double>::from(axis_camera(64));
    RasterSettings no_floor;
    no_floor.cov2d_floor = 0.0;
    auto near = project(isotropic({0.1, -0.2, 2.0}, 0.05, 0.5), 2, cam, no_floor);
    auto far = project(isotropic({0.2, -0.4, 4.0}, 0.05, 0.5), 2, cam, no_floor);
    REQUIRE(near);
    REQUIRE(far);
    CHECK(std::sqrt(far->cov2d.a) == doctest::Approx(0.5 * std::sqrt(near->cov2d.a)).epsilon(1e-2));
    CHECK(std::sqrt(far->cov2d.c) == doctest::Approx(0.5 * std::sqrt(near->cov2d.c)).epsilon(1e-2));
}

TEST_CASE("projected covariance eigenvalues respect the floor")
{
    auto cam = CameraFrame<double>::from(axis_camera(64));
    Rng rng(4);
    for (int i = 0; i < 200; ++i)
    {
        auto g = isotropic({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.5, 5)}, 0.01, 0.5);
        g.log_scale = {rng.uniform(-7, 0), rng.uniform(-7, 0), rng.uniform(-7, 0)};
        g.rotation = Quat<double>(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        auto p = project(g, 2, cam);
        if (!p)
            continue;
        double tr = p->cov2d.a + p->cov2d.c, det = p->cov2d.a * p->cov2d.c - p->cov2d.b * p->cov2d.b;
        double lmin = 0.5 * tr - std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
        CHECK(lmin >= 0.3 - 1e-9);
        CHECK(p->alpha > 0.0);
        CHECK(p->alpha < 1.0);
    }
}

TEST_CASE("tile assignment")
{
    std::vector<ProjectedGaussian<double>> one{splat(8, 8, 2.0 / 3.0, 0.5, 1.0, 0)};
    auto bins = tile_and_sort(one, 64, 64);
    int lists = 0;
    for (int t = 0; t < bins.tile_count(); ++t)
        lists += bins.tile(t).empty() ? 0 : 1;
    CHECK(lists == 1);

    std::vector<ProjectedGaussian<double>> corner{splat(16, 16, 2.0 / 3.0, 0.5, 1.0, 0)};
    bins = tile_and_sort(corner, 64, 64);
    lists = 0;
    for (int t = 0; t < bins.tile_count(); ++t)
        lists += bins.tile(t).empty() ? 0 : 1;
    CHECK(lists == 4);
    CHECK(bins.tile(0).size() == 1);
    CHECK(bins.tile(1).size() == 1);
    CHECK(bins.tile(4).size() == 1);
    CHECK(bins.tile(5).size() == 1);

    // Partial last tile
    std::vector<ProjectedGaussian<double>> edge{splat(39, 39, 1.0, 0.5, 1.0, 0)};
    bins = tile_and_sort(edge, 40, 40);
    CHECK(bins.tiles_x == 3);
    CHECK(bins.tile(8).size() == 1);
}

TEST_CASE("tile lists are depth sorted with index tie-break")
{
    std::vector<ProjectedGaussian<double>> v{splat(8, 8, 1, 0.5, 2.0, 3), splat(8, 8, 1, 0.5, 1.0, 7),
                                             splat(8, 8, 1, 0.5, 2.0, 1), splat(8, 8, 1, 0.5, 1.0, 2)};
    auto bins = tile_and_sort(v, 16, 16);
    auto list = bins.tile(0);
    REQUIRE(list.size() == 4);
    std::vector<std::uint32_t> order;
    for (auto e : list)
        order.push_back(v[e].index);
    CHECK(order == std::vector<std::uint32_t>{2, 7, 1, 3});
}

TEST_CASE("blend_pixel examples")
{
    auto empty = blend_pixel<double>({}, 3, 3);
    CHECK(empty.transmittance == 1.0);
    CHECK(empty.values[0] == 0.0);

    // Opaque primitive: the 0.999 clamp leaves 1e-3 of transmittance
    std::vector<ProjectedGaussian<double>> opaque{splat(3.5, 3.5, 1.0, 1.0, 1.0, 0, 0.8)};
    auto r = blend_pixel<double>(opaque, 3, 3);
    CHECK(r.values[0] == doctest::Approx(0.8).epsilon(1e-3));
    CHECK(r.transmittance == doctest::Approx(0.0).scale(1.0).epsilon(1e-3));

    std::vector<ProjectedGaussian<double>> two{splat(3.5, 3.5, 1.0, 0.5, 1.0, 0, 0.4),
                                               splat(3.5, 3.5, 1.0, 0.5, 2.0, 1, 1.0)};
    r = blend_pixel<double>(two, 3, 3);
    CHECK(r.values[0] == doctest::Approx(0.5 * 0.4 + 0.25 * 1.0));
    CHECK(r.transmittance == doctest::Approx(0.25));
}

TEST_CASE("compositing weights sum to one minus final transmittance")
{
    Rng rng(21);
    RasterSettings s;
    for (int trial = 0; trial < 500; ++trial)
    {
        auto list = random_list(rng, 1 + int(rng.below(40)));
        double trans = 1.0, wsum = 0.0;
        for (const auto &p : list)
        {
            double a = contribution_alpha(p, 4.5, 4.5, s);
            if (a == 0.0)
                continue;
            double w = a * trans;
            CHECK(w >= 0.0);
            CHECK(w <= 1.0);
            wsum += w;
            double next = trans * (1.0 - a);
            CHECK(next <= trans);
            trans = next;
            if (trans < s.t_stop)
                break;
        }
        auto r = blend_pixel<double>(list, 4, 4);
        CHECK(r.transmittance == doctest::Approx(trans).epsilon(1e-12));
        CHECK(std::abs(wsum - (1.0 - r.transmittance)) <= 1e-9);
        CHECK(r.transmittance >= 0.0);
        CHECK(r.transmittance <= 1.0);
    }
}

TEST_CASE("a near-opaque occluder suppresses what lies behind it")
{
    Rng rng(22);
    for (int trial = 0; trial < 200; ++trial)
    {
        auto behind = random_list(rng, 1 + int(rng.below(20)));
        for (auto &p : behind)
            p.depth += 1.0;
        auto unoccluded = blend_pixel<double>(behind, 4, 4);
        auto front = splat(4.5, 4.5, 1.0, 0.999, 0.5, 999);
        front.values = {0.0, 0.0, 0.0};
        std::vector<ProjectedGaussian<double>> all{front};
        all.insert(all.end(), behind.begin(), behind.end());
        auto occluded = blend_pixel<double>(all, 4, 4);
        for (int c = 0; c < kNumChannels; ++c)
            CHECK(occluded.values[std::size_t(c)] <= 1e-3 * unoccluded.values[std::size_t(c)] + 1e-15);
    }
}

TEST_CASE("early exit changes each pixel by at most 1e-3")
{
    Rng rng(23);
    RasterSettings full;
    full.t_stop = 0.0;
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial)
    {
        auto list = random_list(rng, 5 + int(rng.below(80)));
        auto a = blend_pixel<double>(list, 4, 4);
        auto b = blend_pixel<double>(list, 4, 4, full);
        for (int c = 0; c < kNumChannels; ++c)
            worst = std::max(worst, std::abs(a.values[std::size_t(c)] - b.values[std::size_t(c)]));
    }
    CHECK(worst <= 1e-3);
}

TEST_CASE("render_view basics")
{
    RRFModel empty;
    auto s = render_view(empty, axis_camera(32));
    CHECK(s.projection.kind == ProjectionKind::pinhole);
    CHECK(std::all_of(s.data.begin(), s.data.end(), [](float v) { return v == 0.0f; }));

    RRFModel one;
    one.gaussians.push_back(isotropic({0, 0, 2}, 0.05, 0.99).cast<float>());
    auto v = render_view(one, axis_camera(32));
    const double f = 16.0, sigma_px = std::sqrt((f * 0.05 / 2) * (f * 0.05 / 2) + 0.3);
    int inside = 0;
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c)
        {
            double dx = c + 0.5 - 16.0, dy = r + 0.5 - 16.0;
            bool in_footprint = dx * dx + dy * dy <= 9.0 * sigma_px * sigma_px;
            if (!in_footprint)
                CHECK(v.at(kGain, r, c) == 0.0f);
            inside += v.at(kGain, r, c) > 0.0f ? 1 : 0;
        }
    CHECK(inside > 0);
    CHECK(v.at(kGain, 15, 15) > 0.0f);
}

TEST_CASE("rendering is independent of the worker count")
{
    RRFModel m = random_scene_model(3000, 8);
    PinholeCamera cam;
    cam.pose.position = {2.5, 2.0, 1.5};
    cam.pose.orientation = Quat<double>(std::cos(0.3), 0.2, std::sin(0.3), -0.1).normalized();
    cam.resolution = 96;
    set_thread_count(1);
    auto a = render_view(m, cam);
    auto pa = render_panorama(m, cam.pose, 32);
    set_thread_count(4);
    auto b = render_view(m, cam);
    auto pb = render_panorama(m, cam.pose, 32);
    set_thread_count(0);
    CHECK(a.data == b.data);
    CHECK(pa.data == pb.data);
}

TEST_CASE("panorama center mapping and empty model")
{
    RRFModel empty;
    RxPose pose;
    auto z = render_panorama(empty, pose, 32);
    CHECK(z.height == 32);
    CHECK(z.width == 64);
    CHECK(std::all_of(z.data.begin(), z.data.end(), [](float v) { return v == 0.0f; }));
    CHECK_THROWS(render_panorama(empty, pose, 20));

    RRFModel one;
    one.gaussians.push_back(isotropic({2, 0, 0}, 0.03, 0.9).cast<float>());
    auto p = render_panorama(one, pose, 64);
    float best = 0.0f;
    for (float v : std::span(p.data).subspan(p.plane_size() * kGain, p.plane_size()))
        best = std::max(best, v);
    CHECK(best > 0.0f);
    CHECK(p.at(kGain, 32, 64) == doctest::Approx(best).epsilon(1e-5));
}

TEST_CASE("yaw by pi shifts the panorama by half its width")
{
    RRFModel m = random_scene_model(2000, 12);
    RxPose pose;
    pose.position = {2.4, 1.9, 1.3};
    auto a = render_panorama(m, pose, 32);
    RxPose turned = pose;
    turned.orientation = Quat<double>(0.0, 0.0, 0.0, 1.0);
    auto b = render_panorama(m, turned, 32);
    const int W = a.width;
    double worst = 0.0;
    for (int ch = 0; ch < kNumChannels; ++ch)
        for (int r = 0; r < a.height; ++r)
            for (int c = 0; c < W; ++c)
                worst = std::max(worst, double(std::abs(a.at(ch, r, c) - b.at(ch, r, (c + W / 2) % W))));
    CHECK(worst <= 1e-3);
}

TEST_CASE("float and double pipelines agree")
{
    RRFModel m = random_scene_model(1500, 13);
    PinholeCamera cam;
    cam.pose.position = {2.5, 2.0, 1.5};
    cam.resolution = 48;
    auto f = rasterize(m, cam);
    auto d = rasterize(m.cast<double>(), cam);
    double worst = 0.0;
    for (std::size_t i = 0; i < f.image.data.size(); ++i)
        worst = std::max(worst, std::abs(double(f.image.data[i]) - d.image.data[i]));
    CHECK(worst < 1e-3);
}

TEST_CASE("rendered channels stay inside their ranges")
{
    RRFModel m = random_scene_model(2000, 41);
    for (auto &g : m.gaussians)
        for (int c = 0; c < kNumChannels; ++c)
            g.coeff(c, 0) *= 6.0f; // Push many values outside [0, 1]
    RxPose pose;
    pose.position = {2.5, 2.0, 1.5};
    auto pano = render_panorama(m, pose, 32);
    for (int c = 0; c < kNumChannels; ++c)
        for (int r = 0; r < pano.height; ++r)
            for (int col = 0; col < pano.width; ++col)
            {
                const float v = pano.at(c, r, col);
                CHECK(v >= 0.0f);
                if (c != kGain)
                    CHECK(v <= 1.0f + 1e-6f);
            }
}
