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

#ifndef RRF_ORACLE_HPP
#define RRF_ORACLE_HPP

#include "rrf/scene.hpp"
#include "rrf/spectrum.hpp"

#include <optional>
#include <span>
#include <vector>

// Specular image-method ray tracer used as synthetic ground truth.
// Only specular reflections up to second order are modelled; no diffraction, scattering or transmission.

namespace rrf
{
    struct MultipathComponent
    {
        Point3 aoa;                  // Unit direction at Rx toward the last interaction (world frame)
        std::optional<Point3> aod;   // Unit direction at Tx toward the first interaction; absent for rendered MPCs
        double gain = 0.0;           // Linear field amplitude
        double tof = 0.0;            // [s]
        int order = 0;               // Number of reflections
        std::vector<Point3> bounces; // Interaction points, Tx side first
    };

    Point3 mirror_point(const Point3 &p, const Facet &facet);

    // True iff a facet not listed in "exclude" crosses the open segment (a, b).
    // Hits within a relative distance of 1e-9 from either endpoint are ignored.
    bool occlusion_test(const Point3 &a, const Point3 &b, const Scene &scene, std::span<const int> exclude = {});

    // LoS plus all specular paths up to max_order (0, 1 or 2), sorted by descending gain.
    // Path gain is lambda / (4 pi L) times the product of the reflection coefficients.
    std::vector<MultipathComponent> trace_paths(const Scene &scene, const Point3 &rx, int max_order);

    // Delta-splats MPCs into an equirectangular H x 2H spectrum in the pose frame.
    // gain channel: sum of gains / g_ref; tof channel: gain-weighted mean of tof / tau_max; visual: 0.
    RadioSpatialSpectrum splat_oracle_spectrum(std::span<const MultipathComponent> mpcs, const RxPose &pose,
                                               int height, int width, double g_ref, double tau_max);

} // namespace rrf

#endif
