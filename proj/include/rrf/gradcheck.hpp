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

#ifndef RRF_GRADCHECK_HPP
#define RRF_GRADCHECK_HPP

#include "rrf/backward.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace rrf
{
    enum ParamGroup : int
    {
        kGroupPosition = 0,
        kGroupLogScale,
        kGroupRotation,
        kGroupOpacity,
        kGroupSh,
        kNumParamGroups
    };
    inline constexpr std::array<const char *, kNumParamGroups> kParamGroupNames = {"position", "log_scale", "rotation",
                                                                                  "opacity_logit", "sh"};

    struct GradcheckOptions
    {
        int primitives = 50;
        int resolution = 32;
        int sh_degree = 2;
        double step = 1e-4;           // Central difference step
        double abs_floor = 1e-6;      // Added to the denominator of the relative error
        double smooth_tol = 1e-4;     // Stencils whose h and h/2 estimates disagree by more are skipped
        bool single_precision = false; // Analytic gradient in float, differences in double
    };

    struct GradcheckReport
    {
        double max_rel_error = 0.0;
        std::array<double, kNumParamGroups> group_max{};
        std::size_t checked = 0;
        std::size_t skipped = 0; // Stencils straddling a compositing discontinuity
        int worst_primitive = -1;
        std::string worst_group;
    };

    // Random model in front of a forward-looking camera at the origin
    BasicModel<double> random_gradcheck_model(int primitives, int sh_degree, std::uint64_t seed);

    // Compares backward_view against central differences of the full loss on one random model
    GradcheckReport gradcheck(std::uint64_t seed, const GradcheckOptions &options = {});

    // Evaluates scalar loss and fills analytic gradients for a model and view (double precision)
    double view_loss_and_gradient(const BasicModel<double> &model, const PinholeCamera &cam,
                                  const Planes<double> &target, const LossWeights &weights,
                                  Gradients<double> *grads, const RasterSettings &settings = {});

} // namespace rrf

#endif
