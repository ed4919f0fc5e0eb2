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

#include "rrf/model.hpp"
#include "rrf/binary_io.hpp"
#include "rrf/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace rrf
{
    double sh_eval(std::span<const double> coeffs, const Vec3<double> &dir)
    {
        int degree = -1;
        for (int l = 0; l <= kMaxShDegree; ++l)
            if (std::size_t(sh_coeff_count(l)) == coeffs.size())
                degree = l;
        if (degree < 0)
            throw std::invalid_argument("sh_eval: coefficient count must be (L+1)^2 with L in 0..3");
        double basis[kMaxShCoeffs];
        sh_basis(degree, dir, basis);
        double sum = 0.0;
        for (std::size_t k = 0; k < coeffs.size(); ++k)
            sum += coeffs[k] * basis[k];
        return sum;
    }

    SceneMeta scene_meta(const Scene &scene)
    {
        return {scene.tau_max, scene.g_ref, scene.carrier_freq, scene.tx_position};
    }

    double mean_nearest_neighbor_distance(const std::vector<Vec3<double>> &points)
    {
        const std::size_t n = points.size();
        if (n < 2)
            return 0.0;

        Vec3<double> lo = points[0], hi = points[0];
        for (const auto &p : points)
            for (int a = 0; a < 3; ++a)
                lo[a] = std::min(lo[a], p[a]), hi[a] = std::max(hi[a], p[a]);
        Vec3<double> ext = hi - lo;
        double extent = std::max({ext.x, ext.y, ext.z, 1e-12});
        // Roughly one point per cell for a surface-like distribution
        double cell = std::max(extent / 1024.0, extent / std::sqrt(double(n)));

        auto key = [&](long ix, long iy, long iz) { return (ix * 73856093L) ^ (iy * 19349663L) ^ (iz * 83492791L); };
        auto cell_of = [&](const Vec3<double> &p, int a) { return long(std::floor((p[a] - lo[a]) / cell)); };
        std::unordered_multimap<long, std::size_t> grid;
        grid.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            grid.emplace(key(cell_of(points[i], 0), cell_of(points[i], 1), cell_of(points[i], 2)), i);

        long max_ring = long(std::ceil(extent / cell)) + 1;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            const auto &p = points[i];
            long cx = cell_of(p, 0), cy = cell_of(p, 1), cz = cell_of(p, 2);
            double best = std::numeric_limits<double>::infinity();
            for (long ring = 0; ring <= max_ring; ++ring)
            {
                for (long dx = -ring; dx <= ring; ++dx)
                    for (long dy = -ring; dy <= ring; ++dy)
                        for (long dz = -ring; dz <= ring; ++dz)
                        {
                            if (std::max({std::labs(dx), std::labs(dy), std::labs(dz)}) != ring)
                                continue;
                            auto [b, e] = grid.equal_range(key(cx + dx, cy + dy, cz + dz));
                            for (auto it = b; it != e; ++it)
                            {
                                if (it->second == i)
                                    continue;
                                double d = norm(points[it->second] - p);
                                // Hash collisions only add candidates, never hide them
                                best = std::min(best, d);
                            }
                        }
                // Every point outside the searched block is at least ring * cell away
                if (best <= double(ring) * cell)
                    break;
            }
            total += best;
        }
        return total / double(n);
    }

    RRFModel init_model(const Scene &scene, int n_surface, int n_uniform, std::uint64_t seed, const InitOptions &options)
    {
        if (n_surface < 0 || n_uniform < 0 || n_surface + n_uniform <= 0 || options.transmitter_seeds < 0)
            throw std::invalid_argument("init_model: need at least one primitive");
        if (n_surface > 0 && scene.facets.empty())
            throw std::invalid_argument("init_model: scene has no facets for surface sampling");
        if (options.sh_degree < 0 || options.sh_degree > kMaxShDegree)
            throw std::invalid_argument("init_model: sh_degree must be in 0..3");

        Rng rng(seed);
        std::vector<Vec3<double>> points;
        points.reserve(std::size_t(n_surface + n_uniform));

        // Two triangles per facet, sampled by area
        struct Tri
        {
            Point3 a, b, c;
        };
        std::vector<Tri> tris;
        std::vector<double> cdf;
        double total_area = 0.0;
        for (const auto &f : scene.facets)
        {
            for (const Tri &t : {Tri{f.vertices[0], f.vertices[1], f.vertices[2]}, Tri{f.vertices[0], f.vertices[2], f.vertices[3]}})
            {
                total_area += 0.5 * norm(cross(t.b - t.a, t.c - t.a));
                tris.push_back(t);
                cdf.push_back(total_area);
            }
        }
        for (int i = 0; i < n_surface; ++i)
        {
            double u = rng.uniform() * total_area;
            std::size_t k = std::size_t(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
            k = std::min(k, tris.size() - 1);
            double r1 = rng.uniform(), r2 = rng.uniform();
            if (r1 + r2 > 1.0)
                r1 = 1.0 - r1, r2 = 1.0 - r2;
            const Tri &t = tris[k];
            points.push_back(t.a + (t.b - t.a) * r1 + (t.c - t.a) * r2);
        }
        const Aabb &box = scene.aabb;
        for (int i = 0; i < n_uniform; ++i)
        {
            double x = rng.uniform(box.min.x, box.max.x);
            double y = rng.uniform(box.min.y, box.max.y);
            double z = rng.uniform(box.min.z, box.max.z);
            points.push_back({x, y, z});
        }

        double diag = box.diagonal();
        double nn = points.size() > 1 ? mean_nearest_neighbor_distance(points) : 0.01 * diag;
        double scale = std::clamp(nn, 1e-6, diag);

        RRFModel model;
        model.sh_degree = options.sh_degree;
        model.meta = scene_meta(scene);
        model.gaussians.reserve(points.size());
        for (const auto &p : points)
        {
            GaussianPrimitive<float> g;
            g.position = Vec3<float>(p);
            float ls = float(std::log(scale));
            g.log_scale = {ls, ls, ls};
            g.rotation = {1.0f, 0.0f, 0.0f, 0.0f};
            g.opacity_logit = float(logit(options.initial_alpha));
            for (int c = 0; c < kNumChannels; ++c)
                g.coeff(c, 0) = float(sh_dc_for_value(options.channel_defaults[std::size_t(c)]));
            model.gaussians.push_back(g);
        }

        // Seeds at the transmitter, where the line-of-sight component appears to originate
        for (int i = 0; i < options.transmitter_seeds; ++i)
        {
            GaussianPrimitive<float> g = model.gaussians.empty() ? GaussianPrimitive<float>{} : model.gaussians.back();
            g.position = Vec3<float>(scene.tx_position);
            const float ls = float(std::log(options.transmitter_scale));
            g.log_scale = {ls, ls, ls};
            g.rotation = {1.0f, 0.0f, 0.0f, 0.0f};
            g.opacity_logit = float(logit(options.initial_alpha));
            g.sh = {};
            for (int c = 0; c < kNumChannels; ++c)
                g.coeff(c, 0) = float(sh_dc_for_value(options.channel_defaults[std::size_t(c)]));
            model.gaussians.push_back(g);
        }
        return model;
    }

    // --------------------------------------------------------------------------------------------
    // .rrfg: "RRFG", version, N, L, C, scene meta (6 x f64), then per primitive
    // position(3) log_scale(3) rotation wxyz(4) opacity_logit(1) sh(C x (L+1)^2) as f32

    static constexpr char kModelMagic[4] = {'R', 'R', 'F', 'G'};
    static constexpr std::uint32_t kModelVersion = 1;

    void write_model(const RRFModel &model, const std::string &path)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write model file '" + path + "'");
        const int k = model.coeffs_per_channel();
        out.write(kModelMagic, 4);
        write_le<std::uint32_t>(out, kModelVersion);
        write_le<std::uint32_t>(out, std::uint32_t(model.gaussians.size()));
        write_le<std::uint32_t>(out, std::uint32_t(model.sh_degree));
        write_le<std::uint32_t>(out, std::uint32_t(kNumChannels));
        write_le<double>(out, model.meta.tau_max);
        write_le<double>(out, model.meta.g_ref);
        write_le<double>(out, model.meta.carrier_freq);
        write_le<double>(out, model.meta.tx_position.x);
        write_le<double>(out, model.meta.tx_position.y);
        write_le<double>(out, model.meta.tx_position.z);

        std::vector<float> rec;
        rec.reserve(std::size_t(11 + kNumChannels * k));
        for (const auto &g : model.gaussians)
        {
            rec.clear();
            rec.insert(rec.end(), {g.position.x, g.position.y, g.position.z, g.log_scale.x, g.log_scale.y, g.log_scale.z,
                                   g.rotation.w, g.rotation.x, g.rotation.y, g.rotation.z, g.opacity_logit});
            for (int c = 0; c < kNumChannels; ++c)
                for (int j = 0; j < k; ++j)
                    rec.push_back(g.coeff(c, j));
            write_le_array<float>(out, rec);
        }
        if (!out)
            throw std::runtime_error("write failed for '" + path + "'");
    }

    RRFModel read_model(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw std::runtime_error("cannot open model file '" + path + "'");
        char magic[4];
        in.read(magic, 4);
        if (!in || !std::equal(magic, magic + 4, kModelMagic))
            throw std::runtime_error("'" + path + "' is not an RRFG file");
        if (read_le<std::uint32_t>(in) != kModelVersion)
            throw std::runtime_error("'" + path + "': unsupported RRFG version");
        std::uint32_t n = read_le<std::uint32_t>(in);
        std::uint32_t degree = read_le<std::uint32_t>(in);
        std::uint32_t channels = read_le<std::uint32_t>(in);
        if (degree > std::uint32_t(kMaxShDegree) || channels != std::uint32_t(kNumChannels))
            throw std::runtime_error("'" + path + "': unsupported SH degree or channel count");

        RRFModel model;
        model.sh_degree = int(degree);
        model.meta.tau_max = read_le<double>(in);
        model.meta.g_ref = read_le<double>(in);
        model.meta.carrier_freq = read_le<double>(in);
        model.meta.tx_position.x = read_le<double>(in);
        model.meta.tx_position.y = read_le<double>(in);
        model.meta.tx_position.z = read_le<double>(in);
        if (!in)
            throw std::runtime_error("'" + path + "': truncated RRFG header");

        const int k = model.coeffs_per_channel();
        std::vector<float> rec(std::size_t(11 + kNumChannels * k));
        model.gaussians.resize(n);
        for (auto &g : model.gaussians)
        {
            read_le_array<float>(in, rec);
            if (!in)
                throw std::runtime_error("'" + path + "': truncated RRFG record");
            g.position = {rec[0], rec[1], rec[2]};
            g.log_scale = {rec[3], rec[4], rec[5]};
            g.rotation = {rec[6], rec[7], rec[8], rec[9]};
            g.opacity_logit = rec[10];
            for (int c = 0; c < kNumChannels; ++c)
                for (int j = 0; j < k; ++j)
                    g.coeff(c, j) = rec[std::size_t(11 + c * k + j)];
            float qn = g.rotation.norm();
            if (!(qn > 0.0f) || !std::isfinite(qn))
                throw std::runtime_error("'" + path + "': invalid rotation quaternion");
            if (std::abs(qn - 1.0f) > 1e-6f)
                g.rotation = g.rotation.normalized();
        }
        return model;
    }

} // namespace rrf
