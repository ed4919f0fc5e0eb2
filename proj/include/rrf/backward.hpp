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

#ifndef RRF_BACKWARD_HPP
#define RRF_BACKWARD_HPP

#include "rrf/loss.hpp"
#include "rrf/rasterizer.hpp"

#include <vector>

// Reverse-mode derivatives of the render pipeline. Gradients are stored in GaussianPrimitive
// records so they line up field by field with the parameters.
//
// Compositing with early exit is differentiated as executed: contributions skipped by the
// alpha threshold or the transmittance stop receive no gradient.

namespace rrf
{
    template <typename T>
    GaussianPrimitive<T> zero_gradient()
    {
        GaussianPrimitive<T> g;
        g.rotation = {T(0), T(0), T(0), T(0)};
        return g;
    }

    template <typename T>
    struct Gradients
    {
        std::vector<GaussianPrimitive<T>> params;
        std::vector<double> mean2d_norm_sum; // Sum over views of |dL/dmean2d| in NDC units
        std::vector<int> visible_views;      // Views in which the primitive was projected

        explicit Gradients(std::size_t n = 0)
            : params(n, zero_gradient<T>()), mean2d_norm_sum(n, 0.0), visible_views(n, 0)
        {
        }
        std::size_t size() const { return params.size(); }
        void clear();
    };

    // Gradient carried by one projected Gaussian
    template <typename T>
    struct ProjectedGrad
    {
        Vec2<T> mean2d;
        Sym2<T> conic;
        T alpha = T(0);
        std::array<T, kNumChannels> values{};
    };

    // Adjoint of project(): maps a screen-space gradient back to the primitive's parameters
    template <typename T>
    GaussianPrimitive<T> project_backward(const GaussianPrimitive<T> &g, int sh_degree, const CameraFrame<T> &cam,
                                          const RasterSettings &settings, const ProjectedGrad<T> &grad);

    // Adds the gradient of a pinhole view to "out" given dL/d(image)
    template <typename T>
    void backward_view(const BasicModel<T> &model, const ViewRender<T> &forward, const Planes<T> &d_image,
                       const RasterSettings &settings, Gradients<T> &out);

    // Adds the gradient of a panorama given dL/d(panorama image)
    template <typename T>
    void backward_panorama(const BasicModel<T> &model, const PanoramaRender<T> &forward, const Planes<T> &d_image,
                           const RasterSettings &settings, Gradients<T> &out);

    // Throws std::runtime_error naming the first primitive with a non-finite gradient
    template <typename T>
    void check_finite(const Gradients<T> &grads);

} // namespace rrf

#endif
