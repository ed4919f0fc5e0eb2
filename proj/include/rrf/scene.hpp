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

#ifndef RRF_SCENE_HPP
#define RRF_SCENE_HPP

#include "rrf/math.hpp"

#include <array>
#include <string>
#include <vector>

namespace rrf
{
    using Point3 = Vec3<double>;

    // Planar convex quad reflector. Both sides reflect.
    struct Facet
    {
        std::array<Point3, 4> vertices; // Ordered corners [m]
        Point3 normal;                  // Unit normal
        double reflection_coeff = 1.0;  // Real amplitude reflection coefficient in [0, 1]

        // Builds a facet from ordered corners, normal from the winding (v1-v0) x (v3-v0)
        static Facet from_corners(const std::array<Point3, 4> &corners, double reflection_coeff);

        double area() const;
        double signed_distance(const Point3 &p) const { return dot(p - vertices[0], normal); }

        // True if p (assumed on the plane) lies inside the quad, boundary included within a relative tolerance
        bool contains(const Point3 &p) const;
    };

    struct Aabb
    {
        Point3 min, max;
        bool contains(const Point3 &p) const;
        double diagonal() const { return norm(max - min); }
    };

    struct Scene
    {
        std::vector<Facet> facets;
        Point3 tx_position;
        double carrier_freq = 28e9; // [Hz]
        Aabb aabb;
        double tau_max = 1e-7; // ToF normalization [s]
        double g_ref = 1.0;    // Linear gain normalization

        double wavelength() const { return kSpeedOfLight / carrier_freq; }

        // Throws std::invalid_argument describing the first violated invariant
        void validate() const;
    };

    // Deterministic visual albedo of facet "id" used by the reference visualization
    double facet_albedo(std::size_t id);

    // Scene JSON IO (schema documented in README)
    Scene load_scene(const std::string &path);
    void save_scene(const Scene &scene, const std::string &path);
    Scene scene_from_json_text(const std::string &text);
    std::string scene_to_json_text(const Scene &scene);

    // Closed axis-aligned room [0,size] with 6 inward-facing walls.
    // Defaults: tau_max = 100 ns, g_ref = Friis amplitude at 1 m.
    Scene make_box_scene(const Point3 &size, const Point3 &tx, double carrier_freq = 28e9,
                         const std::array<double, 6> &reflection = {0.5, 0.5, 0.5, 0.5, 0.6, 0.4});

    // Long box with an additional free-standing pillar panel across the middle
    Scene make_corridor_scene(double length, double width, double height, const Point3 &tx,
                              double carrier_freq = 28e9);

} // namespace rrf

#endif
