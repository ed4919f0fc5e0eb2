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

#ifndef RRF_TRAINER_HPP
#define RRF_TRAINER_HPP

#include "rrf/backward.hpp"
#include "rrf/camera.hpp"
#include "rrf/loss.hpp"
#include "rrf/scene.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace rrf
{
    struct LearningRates
    {
        double position = 2e-4;   // Multiplied by the scene diagonal
        double log_scale = 5e-3;
        double rotation = 1e-3;
        double opacity = 5e-2;
        std::array<double, kNumChannels> sh = {2.5e-3, 2.5e-3, 2.5e-3};
        double sh_rest_scale = 0.05; // Multiplies sh for every coefficient above the DC term
    };

    // Which parameter groups an optimizer step may modify
    struct ParamMask
    {
        bool position = false, log_scale = false, rotation = false, opacity = false;
        std::array<bool, kNumChannels> sh = {false, false, false};

        static ParamMask geometry_and_visual() { return {true, true, true, true, {true, false, false}}; }
        static ParamMask radio() { return {false, false, false, true, {false, true, true}}; }
    };

    struct OptimState
    {
        std::vector<GaussianPrimitive<float>> first_moment;
        std::vector<GaussianPrimitive<float>> second_moment;
        std::int64_t step = 0;

        explicit OptimState(std::size_t n = 0)
            : first_moment(n, zero_gradient<float>()), second_moment(n, zero_gradient<float>())
        {
        }
        std::size_t size() const { return first_moment.size(); }
    };

    struct AdamSettings
    {
        double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
    };

    // One bias-corrected Adam step on the masked groups; rotations are renormalized when trained.
    // "position_scale" multiplies the position learning rate.
    void opt_step(RRFModel &model, const Gradients<float> &grads, OptimState &state, const LearningRates &lr,
                  const ParamMask &mask, double position_scale = 1.0, const AdamSettings &adam = {});

    struct Phase
    {
        double scale = 1.0; // Fraction of the dataset view resolution
        int iterations = 0;
    };

    struct DensifySettings
    {
        int interval = 100;          // Iterations between densify/prune passes (0 disables)
        int start = 100;             // First iteration eligible
        int stop_before = 1 << 30;   // Iterations from here on do not densify
        double grad_threshold = 2e-4; // Mean |dL/dmean2d| in NDC units
        double scale_fraction = 0.01; // Clone below, split at or above this fraction of the scene diagonal
        double prune_alpha = 0.005;
        std::size_t max_primitives = 200000;
    };

    // Model initialization used when training starts from a scene
    struct InitSettings
    {
        int surface = 10000;
        int uniform = 0;
        int transmitter_seeds = 1;
        double initial_alpha = 0.1;
    };

    struct TrainConfig
    {
        InitSettings init;
        std::vector<Phase> stage1_phases = {{0.25, 300}, {0.5, 300}, {1.0, 600}};
        int stage2_iterations = 3000;
        LearningRates lr;
        LossWeights stage1_loss = LossWeights::visual_only();
        LossWeights stage2_loss = {0.0, 0.0, 10.0, 1.0};
        DensifySettings densify;
        std::uint64_t seed = 0;
        bool deterministic = true;
        int log_interval = 50;
        double scene_diagonal = 0.0; // Scale for position lr and the split threshold; 0 derives it from the model

        void validate() const;
    };

    TrainConfig load_train_config(const std::string &path);
    void save_train_config(const TrainConfig &config, const std::string &path);
    std::string train_config_json(const TrainConfig &config);
    TrainConfig train_config_from_json(const std::string &text);

    // Fresh model for a scene using config.init and config.seed
    RRFModel initial_model(const Scene &scene, const TrainConfig &config);

    struct VisualSample
    {
        PinholeCamera camera;
        RadioSpatialSpectrum target; // Pinhole view, visual channel populated
    };

    struct SpectrumSample
    {
        RxPose pose;
        RadioSpatialSpectrum target; // Equirect panorama, gain and tof populated
    };

    // Result of a densify/prune pass. origin[i] is the pre-pass index the new primitive i came from.
    struct DensifyResult
    {
        std::vector<std::uint32_t> origin;
        std::size_t cloned = 0, split = 0, pruned = 0;
    };

    // Clones small and splits large primitives with high view-space gradient, then removes those with
    // alpha below the prune threshold. "state" is remapped alongside (new entries get zero moments).
    DensifyResult densify_and_prune(RRFModel &model, const Gradients<float> &stats, OptimState &state,
                                    const DensifySettings &settings, double scene_diagonal);

    // Children of a split: two primitives at +-0.78 sigma along the major axis with scale / 1.6 and a density
    // that preserves the combined opacity at the parent's center
    std::array<GaussianPrimitive<float>, 2> split_primitive(const GaussianPrimitive<float> &g);

    // Line-delimited JSON log sink; may be null
    struct TrainLog
    {
        std::ostream *out = nullptr;
        bool wall_time = true;
    };

    // Coarse-to-fine geometry and visual training on pinhole views
    void train_stage1(RRFModel &model, const std::vector<VisualSample> &views, const TrainConfig &config,
                      const TrainLog &log = {});

    // Radio SH and density training on panoramas with frozen geometry
    void train_stage2(RRFModel &model, const std::vector<SpectrumSample> &spectra, const TrainConfig &config,
                      const TrainLog &log = {});

    // Box-filter downsampling by an integer factor
    Planes<float> downsample(const Planes<float> &image, int factor);

    // Diagonal of the bounding box of the primitive centers (1 when degenerate)
    double extent_diagonal(const RRFModel &model);

} // namespace rrf

#endif
