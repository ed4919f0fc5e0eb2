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

#ifndef RRF_MODEL_HPP
#define RRF_MODEL_HPP

#include "rrf/math.hpp"
#include "rrf/scene.hpp"
#include "rrf/sh.hpp"
#include "rrf/spectrum.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace rrf
{
    // One explicit scene element. Stored parameters are unconstrained:
    // scale = exp(log_scale), density alpha = sigmoid(opacity_logit), rotation is renormalized on use.
    template <typename T>
    struct GaussianPrimitive
    {
        Vec3<T> position;
        Vec3<T> log_scale;
        Quat<T> rotation;
        T opacity_logit = T(0);
        std::array<T, kNumChannels * kMaxShCoeffs> sh{}; // Channel c, coefficient k at sh[c * kMaxShCoeffs + k]

        T alpha() const { return sigmoid(opacity_logit); }
        T &coeff(int channel, int k) { return sh[std::size_t(channel * kMaxShCoeffs + k)]; }
        T coeff(int channel, int k) const { return sh[std::size_t(channel * kMaxShCoeffs + k)]; }

        template <typename U>
        GaussianPrimitive<U> cast() const
        {
            GaussianPrimitive<U> g;
            g.position = Vec3<U>(position);
            g.log_scale = Vec3<U>(log_scale);
            g.rotation = Quat<U>(rotation);
            g.opacity_logit = U(opacity_logit);
            for (std::size_t i = 0; i < sh.size(); ++i)
                g.sh[i] = U(sh[i]);
            return g;
        }

        bool operator==(const GaussianPrimitive &o) const = default;
    };

    struct SceneMeta
    {
        double tau_max = 1e-7;
        double g_ref = 1.0;
        double carrier_freq = 28e9;
        Vec3<double> tx_position;
        bool operator==(const SceneMeta &o) const = default;
    };

    SceneMeta scene_meta(const Scene &scene);

    template <typename T>
    struct BasicModel
    {
        std::vector<GaussianPrimitive<T>> gaussians;
        int sh_degree = 2;
        SceneMeta meta;

        int coeffs_per_channel() const { return sh_coeff_count(sh_degree); }
        std::size_t size() const { return gaussians.size(); }

        template <typename U>
        BasicModel<U> cast() const
        {
            BasicModel<U> m;
            m.sh_degree = sh_degree;
            m.meta = meta;
            m.gaussians.reserve(gaussians.size());
            for (const auto &g : gaussians)
                m.gaussians.push_back(g.template cast<U>());
            return m;
        }

        bool operator==(const BasicModel &o) const = default;
    };

    using RRFModel = BasicModel<float>;

    // DC coefficient that makes a channel evaluate to "value" in every direction
    inline double sh_dc_for_value(double value) { return value / sh_const::c0; }

    // R diag(exp(2 log_scale)) R^T
    template <typename T>
    Mat3<T> covariance(const GaussianPrimitive<T> &g)
    {
        Mat3<T> r = g.rotation.normalized().to_matrix();
        T s[3] = {std::exp(T(2) * g.log_scale.x), std::exp(T(2) * g.log_scale.y), std::exp(T(2) * g.log_scale.z)};
        Mat3<T> out;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                out.m[i][j] = r.m[i][0] * s[0] * r.m[j][0] + r.m[i][1] * s[1] * r.m[j][1] + r.m[i][2] * s[2] * r.m[j][2];
        return out;
    }

    struct InitOptions
    {
        int sh_degree = 2;
        double initial_alpha = 0.1;
        std::array<double, kNumChannels> channel_defaults = {0.5, 0.0, 0.0};
        int transmitter_seeds = 0;       // Extra primitives placed at the transmitter position
        double transmitter_scale = 0.05; // Their isotropic scale [m]
    };

    // n_surface primitives uniform by area on the facets plus n_uniform uniform in the aabb,
    // followed by options.transmitter_seeds primitives at the transmitter.
    // Isotropic scale = mean nearest-neighbour distance. Deterministic given the seed.
    RRFModel init_model(const Scene &scene, int n_surface, int n_uniform, std::uint64_t seed,
                        const InitOptions &options = {});

    // Mean nearest-neighbour distance of a point set (grid accelerated)
    double mean_nearest_neighbor_distance(const std::vector<Vec3<double>> &points);

    // .rrfg binary IO
    void write_model(const RRFModel &model, const std::string &path);
    RRFModel read_model(const std::string &path);

} // namespace rrf

#endif
