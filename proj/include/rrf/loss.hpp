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

#ifndef RRF_LOSS_HPP
#define RRF_LOSS_HPP

#include "rrf/rasterizer.hpp"
#include "rrf/spectrum.hpp"

namespace rrf
{
    // Per-channel loss weights. A channel with weight 0 is inactive.
    struct LossWeights
    {
        double visual = 0.0;          // 0.8 L1 + 0.2 (1 - SSIM)
        double gain = 0.0;            // L1
        double gain_l2 = 0.0;         // Mean squared error on gain, off unless requested
        double tof = 0.0;             // L1 restricted to pixels whose target gain exceeds mask_threshold
        double mask_threshold = 1e-3;
        double ssim_mix = 0.2;

        static LossWeights visual_only() { return {1.0, 0.0, 0.0, 0.0}; }
        static LossWeights radio() { return {0.0, 1.0, 0.0, 1.0}; }
    };

    struct LossTerms
    {
        double visual_l1 = 0.0;
        double ssim = 1.0;
        double gain_l1 = 0.0;
        double gain_l2 = 0.0;
        double tof_l1 = 0.0;
        std::size_t tof_pixels = 0;
        double total = 0.0;
    };

    // Mean structural similarity of two single-channel h x w images (11x11 Gaussian window, sigma 1.5,
    // zero padding). If grad_x is given it receives d(mean SSIM)/dx.
    template <typename T>
    double ssim(const T *x, const T *y, int h, int w, T *grad_x = nullptr);

    // Loss of rendered against target planes; when grad is non-null it is resized and filled with dL/d(rendered)
    template <typename T>
    LossTerms compute_loss(const Planes<T> &rendered, const Planes<T> &target, const LossWeights &weights,
                           Planes<T> *grad = nullptr);

    // Convenience form on spectra. Throws std::invalid_argument on shape or projection mismatch.
    LossTerms loss(const RadioSpatialSpectrum &rendered, const RadioSpatialSpectrum &target, const LossWeights &weights);

    template <typename T>
    Planes<T> to_planes(const RadioSpatialSpectrum &s);

} // namespace rrf

#endif
