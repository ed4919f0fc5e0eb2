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

#include "rrf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rrf
{
    Point3 mirror_point(const Point3 &p, const Facet &facet)
    {
        return p - facet.normal * (2.0 * facet.signed_distance(p));
    }

    // Intersection parameter t of segment a + t (b - a) with the facet plane, if the crossing point is inside the quad
    static std::optional<double> segment_hit(const Point3 &a, const Point3 &b, const Facet &f)
    {
        double da = f.signed_distance(a), db = f.signed_distance(b);
        double denom = da - db;
        if (denom == 0.0 || (da > 0.0) == (db > 0.0) || da == 0.0 || db == 0.0)
            return std::nullopt;
        double t = da / denom;
        Point3 p = a + (b - a) * t;
        if (!f.contains(p))
            return std::nullopt;
        return t;
    }

    bool occlusion_test(const Point3 &a, const Point3 &b, const Scene &scene, std::span<const int> exclude)
    {
        constexpr double eps = 1e-9;
        for (int i = 0; i < int(scene.facets.size()); ++i)
        {
            if (std::find(exclude.begin(), exclude.end(), i) != exclude.end())
                continue;
            const Facet &f = scene.facets[std::size_t(i)];
            double da = f.signed_distance(a), db = f.signed_distance(b);
            if ((da > 0.0 && db > 0.0) || (da < 0.0 && db < 0.0))
                continue;
            double denom = da - db;
            if (denom == 0.0)
                continue; // Segment lies in the plane
            double t = da / denom;
            if (t <= eps || t >= 1.0 - eps)
                continue;
            if (f.contains(a + (b - a) * t))
                return true;
        }
        return false;
    }

    static MultipathComponent make_path(const Scene &scene, const Point3 &rx, const std::vector<Point3> &bounces,
                                        double reflection_product)
    {
        MultipathComponent m;
        double length = 0.0;
        Point3 prev = scene.tx_position;
        for (const auto &b : bounces)
        {
            length += norm(b - prev);
            prev = b;
        }
        length += norm(rx - prev);

        Point3 first = bounces.empty() ? rx : bounces.front();
        Point3 last = bounces.empty() ? scene.tx_position : bounces.back();
        m.aoa = normalized(last - rx);
        m.aod = normalized(first - scene.tx_position);
        m.gain = scene.wavelength() / (4.0 * kPi * length) * reflection_product;
        m.tof = length / kSpeedOfLight;
        m.order = int(bounces.size());
        m.bounces = bounces;
        return m;
    }

    std::vector<MultipathComponent> trace_paths(const Scene &scene, const Point3 &rx, int max_order)
    {
        if (max_order < 0 || max_order > 2)
            throw std::invalid_argument("max_order must be 0, 1 or 2");
        if (norm(rx - scene.tx_position) <= 1e-6)
            throw std::invalid_argument("rx coincides with tx");
        if (!scene.aabb.contains(rx))
            throw std::invalid_argument("rx lies outside the scene aabb");

        const Point3 &tx = scene.tx_position;
        const int n = int(scene.facets.size());
        std::vector<MultipathComponent> paths;

        if (!occlusion_test(tx, rx, scene))
            paths.push_back(make_path(scene, rx, {}, 1.0));

        if (max_order >= 1)
        {
            for (int i = 0; i < n; ++i)
            {
                const Facet &f = scene.facets[std::size_t(i)];
                if (f.reflection_coeff <= 0.0)
                    continue;
                Point3 image = mirror_point(tx, f);
                auto t = segment_hit(rx, image, f);
                if (!t)
                    continue;
                Point3 p = rx + (image - rx) * *t;
                const int ex[] = {i};
                if (occlusion_test(tx, p, scene, ex) || occlusion_test(p, rx, scene, ex))
                    continue;
                paths.push_back(make_path(scene, rx, {p}, f.reflection_coeff));
            }
        }

        if (max_order >= 2)
        {
            for (int i = 0; i < n; ++i)
            {
                const Facet &fi = scene.facets[std::size_t(i)];
                if (fi.reflection_coeff <= 0.0)
                    continue;
                Point3 image1 = mirror_point(tx, fi);
                for (int j = 0; j < n; ++j)
                {
                    if (j == i)
                        continue;
                    const Facet &fj = scene.facets[std::size_t(j)];
                    if (fj.reflection_coeff <= 0.0)
                        continue;
                    Point3 image2 = mirror_point(image1, fj);
                    auto t2 = segment_hit(rx, image2, fj);
                    if (!t2)
                        continue;
                    Point3 p2 = rx + (image2 - rx) * *t2;
                    auto t1 = segment_hit(p2, image1, fi);
                    if (!t1)
                        continue;
                    Point3 p1 = p2 + (image1 - p2) * *t1;
                    const int ex_i[] = {i}, ex_ij[] = {i, j}, ex_j[] = {j};
                    if (occlusion_test(tx, p1, scene, ex_i) || occlusion_test(p1, p2, scene, ex_ij) ||
                        occlusion_test(p2, rx, scene, ex_j))
                        continue;
                    paths.push_back(make_path(scene, rx, {p1, p2}, fi.reflection_coeff * fj.reflection_coeff));
                }
            }
        }

        std::stable_sort(paths.begin(), paths.end(),
                         [](const MultipathComponent &a, const MultipathComponent &b) { return a.gain > b.gain; });
        return paths;
    }

    RadioSpatialSpectrum splat_oracle_spectrum(std::span<const MultipathComponent> mpcs, const RxPose &pose,
                                               int height, int width, double g_ref, double tau_max)
    {
        if (height <= 0 || width != 2 * height)
            throw std::invalid_argument("oracle spectrum resolution must be H x 2H");
        RadioSpatialSpectrum s(height, width, kNumChannels);
        s.pose = pose;
        s.projection.kind = ProjectionKind::equirect;

        // Accumulate in double, then store
        std::vector<double> gain(s.plane_size(), 0.0), tof_weighted(s.plane_size(), 0.0);
        for (const auto &m : mpcs)
        {
            auto px = equirect_pixel(pose.to_local(m.aoa), height, width);
            std::size_t k = std::size_t(px.row) * width + px.col;
            gain[k] += m.gain;
            tof_weighted[k] += m.gain * (m.tof / tau_max);
        }
        for (std::size_t k = 0; k < s.plane_size(); ++k)
        {
            s.data[std::size_t(kGain) * s.plane_size() + k] = float(gain[k] / g_ref);
            s.data[std::size_t(kTof) * s.plane_size() + k] = gain[k] > 0.0 ? float(tof_weighted[k] / gain[k]) : 0.0f;
        }
        return s;
    }

} // namespace rrf
