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

#include "rrf/dataset.hpp"
#include "rrf/gradcheck.hpp"
#include "rrf/oracle.hpp"
#include "rrf/random.hpp"
#include "rrf/trainer.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <vector>

using namespace rrf;

namespace
{
    RadioSpatialSpectrum filled(int h, int w, float visual, float gain, float tof)
    {
        RadioSpatialSpectrum s(h, w);
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c)
            {
                s.at(kVisual, r, c) = visual;
                s.at(kGain, r, c) = gain;
                s.at(kTof, r, c) = tof;
            }
        return s;
    }

    Scene box() { return make_box_scene({5, 4, 3}, {1.3, 1.1, 2.1}); }

    std::vector<VisualSample> visual_views(const Scene &scene, int n, int res, std::uint64_t seed)
    {
        RRFModel ref = reference_visualization(scene);
        std::vector<VisualSample> out;
        for (const auto &pose : sample_poses(scene, n, 0.2, seed))
        {
            PinholeCamera cam = forward_camera(pose, kPi / 2.0, res);
            out.push_back({cam, render_view(ref, cam)});
        }
        return out;
    }

    std::vector<SpectrumSample> radio_views(const Scene &scene, int n, int height, std::uint64_t seed)
    {
        std::vector<SpectrumSample> out;
        for (const auto &pose : sample_poses(scene, n, 0.2, seed))
        {
            auto paths = trace_paths(scene, pose.position, 1);
            out.push_back({pose, splat_oracle_spectrum(paths, pose, height, 2 * height, scene.g_ref, scene.tau_max)});
        }
        return out;
    }

    bool same_bytes(const void *a, const void *b, std::size_t n) { return std::memcmp(a, b, n) == 0; }

    bool geometry_identical(const GaussianPrimitive<float> &a, const GaussianPrimitive<float> &b)
    {
        bool visual = true;
        for (int k = 0; k < kMaxShCoeffs; ++k)
            visual = visual && same_bytes(&a.sh[std::size_t(k)], &b.sh[std::size_t(k)], sizeof(float));
        return visual && same_bytes(&a.position, &b.position, sizeof(a.position)) &&
               same_bytes(&a.log_scale, &b.log_scale, sizeof(a.log_scale)) &&
               same_bytes(&a.rotation, &b.rotation, sizeof(a.rotation));
    }

    bool radio_identical(const GaussianPrimitive<float> &a, const GaussianPrimitive<float> &b)
    {
        return same_bytes(&a.sh[kMaxShCoeffs], &b.sh[kMaxShCoeffs], sizeof(float) * 2 * kMaxShCoeffs);
    }
} // namespace

// --------------------------------------------------------------------------------------------
// Loss

TEST_CASE("loss of identical spectra is zero")
{
    auto a = filled(16, 32, 0.3f, 0.7f, 0.2f);
    a.at(kGain, 3, 4) = 2.0f;
    LossWeights all{1.0, 1.0, 1.0, 1.0};
    auto t = loss(a, a, all);
    CHECK(t.total == doctest::Approx(0.0).scale(1.0));
    CHECK(t.ssim == doctest::Approx(1.0));
}

TEST_CASE("constant gain offset gives its L1")
{
    auto a = filled(16, 32, 0.3f, 0.5f, 0.2f), b = filled(16, 32, 0.3f, 0.6f, 0.2f);
    auto t = loss(a, b, LossWeights{0.0, 1.0, 0.0, 0.0});
    CHECK(t.total == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("tof term is fully masked when the target has no gain")
{
    auto a = filled(16, 32, 0.0f, 0.0f, 0.9f), b = filled(16, 32, 0.0f, 0.0f, 0.1f);
    auto t = loss(a, b, LossWeights{0.0, 0.0, 0.0, 1.0});
    CHECK(t.total == 0.0);
    CHECK(t.tof_pixels == 0);
    b.at(kGain, 2, 2) = 1.0f;
    t = loss(a, b, LossWeights{0.0, 0.0, 0.0, 1.0});
    CHECK(t.tof_pixels == 1);
    CHECK(t.total == doctest::Approx(0.8).epsilon(1e-6));
}

TEST_CASE("loss rejects mismatched inputs")
{
    auto a = filled(16, 32, 0, 0, 0), b = filled(16, 16, 0, 0, 0);
    CHECK_THROWS(loss(a, b, LossWeights::radio()));
    auto c = filled(16, 32, 0, 0, 0);
    c.projection.kind = ProjectionKind::pinhole;
    CHECK_THROWS(loss(a, c, LossWeights::radio()));
}

TEST_CASE("loss is non-negative and SSIM gradient matches finite differences")
{
    Rng rng(17);
    const int h = 14, w = 15;
    std::vector<double> x(h * w), y(h * w), g(h * w);
    for (int i = 0; i < h * w; ++i)
    {
        x[std::size_t(i)] = rng.uniform();
        y[std::size_t(i)] = rng.uniform();
    }
    double s0 = ssim(x.data(), y.data(), h, w, g.data());
    CHECK(s0 < 1.0);
    for (int trial = 0; trial < 20; ++trial)
    {
        std::size_t i = std::size_t(rng.below(std::size_t(h * w)));
        const double step = 1e-6;
        auto xp = x, xm = x;
        xp[i] += step;
        xm[i] -= step;
        double fd = (ssim(xp.data(), y.data(), h, w) - ssim(xm.data(), y.data(), h, w)) / (2 * step);
        CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5).scale(1e-3));
    }

    Planes<double> pa(3, h, w), pb(3, h, w);
    for (auto &v : pa.data)
        v = rng.uniform();
    for (auto &v : pb.data)
        v = rng.uniform();
    CHECK(compute_loss(pa, pb, LossWeights{1.0, 1.0, 1.0, 1.0}).total >= 0.0);
}

// --------------------------------------------------------------------------------------------
// Backward

TEST_CASE("zero loss gives zero gradients")
{
    auto model = random_gradcheck_model(20, 2, 3);
    PinholeCamera cam;
    cam.pose.position = {0, 0, 0};
    cam.pose.orientation = Quat<double>(std::sqrt(0.5), 0.0, std::sqrt(0.5), 0.0); // camera +z onto world +x
    cam.resolution = 32;
    auto fwd = rasterize(model, cam);
    Gradients<double> grads(model.size());
    double l = view_loss_and_gradient(model, cam, fwd.image, LossWeights{0.0, 0.0, 1.0, 0.0}, &grads);
    CHECK(l == 0.0);
    for (const auto &g : grads.params)
    {
        CHECK(g.position.x == 0.0);
        CHECK(g.opacity_logit == 0.0);
        for (double v : g.sh)
            CHECK(v == 0.0);
    }
}

TEST_CASE("single primitive single pixel: gain DC gradient against central difference")
{
    BasicModel<double> model;
    GaussianPrimitive<double> g;
    g.position = {0.01, -0.02, 2.0};
    g.log_scale = {std::log(0.3), std::log(0.2), std::log(0.25)};
    g.opacity_logit = 0.4;
    g.coeff(kGain, 0) = 1.3;
    g.coeff(kGain, 2) = 0.2;
    model.gaussians.push_back(g);
    PinholeCamera cam;
    cam.resolution = 1;
    Planes<double> target(3, 1, 1);
    target.at(kGain, 0, 0) = 0.05;
    LossWeights w{0.0, 1.0, 1.0, 0.0};
    Gradients<double> grads(1);
    view_loss_and_gradient(model, cam, target, w, &grads);

    const double h = 1e-4;
    auto plus = model, minus = model;
    plus.gaussians[0].coeff(kGain, 0) += h;
    minus.gaussians[0].coeff(kGain, 0) -= h;
    double fd = (view_loss_and_gradient(plus, cam, target, w, nullptr) -
                 view_loss_and_gradient(minus, cam, target, w, nullptr)) /
                (2 * h);
    CHECK(fd != 0.0);
    CHECK(grads.params[0].coeff(kGain, 0) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("random 50-primitive model passes the finite-difference check")
{
    for (std::uint64_t seed : {1u, 2u})
    {
        GradcheckReport r = gradcheck(seed);
        INFO("seed " << seed << " worst " << r.worst_group << " primitive " << r.worst_primitive);
        CHECK(r.max_rel_error <= 1e-3);
        CHECK(r.checked > 1000);
        CHECK(r.skipped * 100 < r.checked);
    }
}

TEST_CASE("single-precision gradients stay within 1e-2")
{
    GradcheckOptions o;
    o.single_precision = true;
    GradcheckReport r = gradcheck(5, o);
    CHECK(r.max_rel_error <= 1e-2);
}

TEST_CASE("non-finite gradients name the primitive")
{
    Gradients<float> g(5);
    g.params[3].opacity_logit = std::numeric_limits<float>::quiet_NaN();
    try
    {
        check_finite(g);
        FAIL("expected an exception");
    }
    catch (const std::exception &e)
    {
        CHECK(std::string(e.what()).find("primitive 3") != std::string::npos);
    }
}

// --------------------------------------------------------------------------------------------
// Optimizer

TEST_CASE("optimizer steps")
{
    RRFModel m = init_model(box(), 50, 0, 1);
    const ParamMask all{true, true, true, true, {true, true, true}};
    LearningRates lr;

    RRFModel before = m;
    OptimState state(m.size());
    Gradients<float> zero(m.size());
    opt_step(m, zero, state, lr, all);
    CHECK(m == before);

    OptimState fresh(m.size());
    Gradients<float> g(m.size());
    Rng rng(6);
    for (auto &p : g.params)
    {
        for (int k = 0; k < 3; ++k)
        {
            p.position[k] = float(rng.uniform(-1, 1));
            p.log_scale[k] = float(rng.uniform(-1, 1));
        }
        for (int k = 0; k < 4; ++k)
            p.rotation[k] = float(rng.uniform(-1, 1));
        p.opacity_logit = float(rng.uniform(-1, 1));
        for (auto &v : p.sh)
            v = float(rng.uniform(-1, 1));
    }
    const double pos_scale = 3.0;
    opt_step(m, g, fresh, lr, all, pos_scale);
    CHECK(fresh.step == 1);
    for (std::size_t i = 0; i < m.size(); ++i)
    {
        const auto &a = before.gaussians[i], &b = m.gaussians[i], &d = g.params[i];
        for (int k = 0; k < 3; ++k)
        {
            double expect = -std::copysign(lr.position * pos_scale, double(d.position[k]));
            CHECK(double(b.position[k]) - a.position[k] == doctest::Approx(expect).epsilon(1e-3));
            double es = -std::copysign(lr.log_scale, double(d.log_scale[k]));
            CHECK(double(b.log_scale[k]) - a.log_scale[k] == doctest::Approx(es).epsilon(1e-3));
        }
        CHECK(double(b.opacity_logit) - a.opacity_logit ==
              doctest::Approx(-std::copysign(lr.opacity, double(d.opacity_logit))).epsilon(1e-3));
        CHECK(double(b.coeff(kGain, 0)) - a.coeff(kGain, 0) ==
              doctest::Approx(-std::copysign(lr.sh[kGain], double(d.coeff(kGain, 0)))).epsilon(1e-3));
        CHECK(double(b.coeff(kGain, 1)) - a.coeff(kGain, 1) ==
              doctest::Approx(-std::copysign(lr.sh[kGain] * lr.sh_rest_scale, double(d.coeff(kGain, 1))))
                  .epsilon(1e-3));
        CHECK(double(b.rotation.norm()) == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK_THROWS(opt_step(m, Gradients<float>(3), fresh, lr, all));
}

TEST_CASE("masked groups are untouched")
{
    RRFModel m = init_model(box(), 30, 0, 2);
    RRFModel before = m;
    OptimState state(m.size());
    Gradients<float> g(m.size());
    for (auto &p : g.params)
    {
        p.position = {1, 1, 1};
        p.opacity_logit = 1;
        for (auto &v : p.sh)
            v = 1;
    }
    opt_step(m, g, state, LearningRates{}, ParamMask::radio());
    for (std::size_t i = 0; i < m.size(); ++i)
    {
        CHECK(geometry_identical(m.gaussians[i], before.gaussians[i]));
        CHECK_FALSE(radio_identical(m.gaussians[i], before.gaussians[i]));
        CHECK(m.gaussians[i].opacity_logit != before.gaussians[i].opacity_logit);
    }
}

// --------------------------------------------------------------------------------------------
// Densification

TEST_CASE("densify leaves a quiet model unchanged and prunes transparent primitives")
{
    RRFModel m = init_model(box(), 40, 0, 3);
    Gradients<float> stats(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
    {
        stats.mean2d_norm_sum[i] = 1e-5;
        stats.visible_views[i] = 1;
    }
    OptimState state(m.size());
    DensifySettings ds;
    RRFModel before = m;
    auto r = densify_and_prune(m, stats, state, ds, 7.0);
    CHECK(m == before);
    CHECK(r.cloned + r.split + r.pruned == 0);

    m.gaussians[5].opacity_logit = float(logit(0.001));
    r = densify_and_prune(m, stats, state, ds, 7.0);
    CHECK(m.size() == before.size() - 1);
    CHECK(r.pruned == 1);
    CHECK(state.size() == m.size());
    CHECK(r.origin.size() == m.size());
}

TEST_CASE("high-gradient primitives are cloned when small and split when large")
{
    RRFModel m = init_model(box(), 2, 0, 4);
    m.gaussians[0].log_scale = {std::log(0.01f), std::log(0.01f), std::log(0.01f)};
    m.gaussians[1].log_scale = {std::log(0.5f), std::log(0.1f), std::log(0.1f)};
    Gradients<float> stats(2);
    stats.mean2d_norm_sum = {1e-2, 1e-2};
    stats.visible_views = {1, 1};
    OptimState state(2);
    state.first_moment[0].opacity_logit = 0.5f;
    auto r = densify_and_prune(m, stats, state, DensifySettings{}, 7.0);
    CHECK(r.cloned == 1);
    CHECK(r.split == 1);
    CHECK(m.size() == 4);
    CHECK(state.size() == 4);
    // Existing moments follow their primitive; fresh primitives start from zero moments
    CHECK(state.first_moment[0].opacity_logit == 0.5f);
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < state.size(); ++i)
        zeros += state.first_moment[i].opacity_logit == 0.0f ? 1 : 0;
    CHECK(zeros == 3);
}

TEST_CASE("split conserves appearance at the parent center")
{
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial)
    {
        GaussianPrimitive<float> g;
        g.position = {float(rng.uniform(-0.1, 0.1)), float(rng.uniform(-0.1, 0.1)), 3.0f};
        g.log_scale = {float(std::log(rng.uniform(0.1, 0.3))), float(std::log(rng.uniform(0.02, 0.1))),
                       float(std::log(rng.uniform(0.02, 0.1)))};
        g.rotation = Quat<float>(float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)),
                                 float(rng.uniform(-1, 1)))
                         .normalized();
        g.opacity_logit = float(logit(rng.uniform(0.3, 0.9)));
        g.coeff(kVisual, 0) = float(sh_dc_for_value(0.8));

        RRFModel parent, children;
        parent.gaussians.push_back(g);
        auto pair = split_primitive(g);
        children.gaussians.assign(pair.begin(), pair.end());

        PinholeCamera cam;
        cam.resolution = 64;
        auto a = render_view(parent, cam), b = render_view(children, cam);
        auto px = project(g.cast<double>(), 2, CameraFrame<double>::from(cam));
        REQUIRE(px);
        int col = int(px->mean2d.x), row = int(px->mean2d.y);
        double va = a.at(kVisual, row, col), vb = b.at(kVisual, row, col);
        CHECK(vb == doctest::Approx(va).epsilon(0.1));
    }
}

// --------------------------------------------------------------------------------------------
// Training stages

TEST_CASE("zero iterations leave the model unchanged")
{
    Scene s = box();
    RRFModel m = init_model(s, 300, 0, 5);
    RRFModel before = m;
    TrainConfig c;
    c.stage1_phases = {{1.0, 0}};
    c.stage2_iterations = 0;
    train_stage1(m, visual_views(s, 2, 32, 1), c);
    train_stage2(m, radio_views(s, 2, 32, 1), c);
    CHECK(m == before);
    CHECK_THROWS(train_stage1(m, {}, c));
    CHECK_THROWS(train_stage2(m, {}, c));
}

TEST_CASE("stage 1 lowers held-out loss and never touches radio coefficients")
{
    Scene s = box();
    RRFModel m = init_model(s, 1500, 0, 6);
    Rng rng(1);
    for (auto &g : m.gaussians)
        for (int k = 0; k < 9; ++k)
        {
            g.coeff(kGain, k) = float(rng.uniform(-1, 1));
            g.coeff(kTof, k) = float(rng.uniform(-1, 1));
        }
    auto train = visual_views(s, 8, 64, 2);
    auto held = visual_views(s, 2, 64, 3);
    auto held_loss = [&](const RRFModel &model)
    {
        double total = 0.0;
        for (const auto &v : held)
            total += loss(render_view(model, v.camera), v.target, LossWeights::visual_only()).total;
        return total;
    };
    double before_loss = held_loss(m);
    RRFModel before = m;
    TrainConfig c;
    c.stage1_phases = {{0.5, 60}, {1.0, 60}};
    c.densify.interval = 0;
    c.scene_diagonal = s.aabb.diagonal();
    train_stage1(m, train, c);
    CHECK(held_loss(m) < before_loss);
    REQUIRE(m.size() == before.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        CHECK(radio_identical(m.gaussians[i], before.gaussians[i]));
}

TEST_CASE("stage 2 freezes geometry and lowers its training loss")
{
    Scene s = box();
    InitOptions io;
    io.transmitter_seeds = 1;
    RRFModel m = init_model(s, 1000, 0, 7, io);
    RRFModel before = m;
    TrainConfig c;
    c.stage2_iterations = 1000;
    c.log_interval = 50;
    std::ostringstream log;
    train_stage2(m, radio_views(s, 6, 16, 4), c, {&log, false});
    for (std::size_t i = 0; i < m.size(); ++i)
        CHECK(geometry_identical(m.gaussians[i], before.gaussians[i]));

    std::vector<double> losses;
    std::istringstream in(log.str());
    for (std::string line; std::getline(in, line);)
    {
        auto j = nlohmann::json::parse(line);
        CHECK(j.at("stage") == 2);
        CHECK_FALSE(j.contains("wall_time"));
        losses.push_back(j.at("loss").get<double>());
    }
    REQUIRE(losses.size() == 20);
    double first = 0.0, second = 0.0;
    for (int i = 0; i < 10; ++i)
    {
        first += losses[std::size_t(i)];
        second += losses[std::size_t(i) + 10];
    }
    CHECK(second <= first);
}

TEST_CASE("training is deterministic")
{
    Scene s = box();
    auto views = visual_views(s, 4, 32, 9);
    auto spectra = radio_views(s, 3, 16, 9);
    TrainConfig c;
    c.stage1_phases = {{0.5, 30}, {1.0, 30}};
    c.densify.start = 20;
    c.densify.interval = 20;
    c.stage2_iterations = 30;
    c.init.surface = 500;
    RRFModel a = initial_model(s, c), b = initial_model(s, c);
    train_stage1(a, views, c);
    train_stage2(a, spectra, c);
    train_stage1(b, views, c);
    train_stage2(b, spectra, c);
    CHECK(a == b);
}

TEST_CASE("train config JSON round trip and validation")
{
    TrainConfig c;
    c.stage1_phases = {{0.125, 3}, {1.0, 7}};
    c.lr.sh = {0.1, 0.2, 0.3};
    c.densify.max_primitives = 1234;
    c.init.surface = 77;
    c.seed = 99;
    TrainConfig r = train_config_from_json(train_config_json(c));
    CHECK(train_config_json(r) == train_config_json(c));
    CHECK(r.lr.sh[2] == 0.3);
    CHECK(r.init.surface == 77);

    CHECK_THROWS(train_config_from_json("{\"stage1_phases\":[{\"scale\":0.3,\"iterations\":1}]}"));
    CHECK_THROWS(train_config_from_json("{\"stage2_iterations\":-1}"));
    CHECK_THROWS(train_config_from_json("not json"));
}

TEST_CASE("downsample averages blocks")
{
    Planes<float> p(1, 4, 4);
    for (int i = 0; i < 16; ++i)
        p.data[std::size_t(i)] = float(i);
    auto d = downsample(p, 2);
    CHECK(d.height == 2);
    CHECK(d.at(0, 0, 0) == doctest::Approx((0 + 1 + 4 + 5) / 4.0));
    CHECK_THROWS(downsample(p, 3));
}
