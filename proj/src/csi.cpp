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

#include "rrf/csi.hpp"
#include "rrf/rasterizer.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rrf
{
    std::vector<MultipathComponent> extract_mpcs(const RadioSpatialSpectrum &spec, const ExtractOptions &options)
    {
        if (spec.channels <= kTof)
            throw std::invalid_argument("extract_mpcs needs gain and tof channels");
        const int h = spec.height, w = spec.width;
        const bool wrap = spec.projection.kind == ProjectionKind::equirect;

        struct Peak
        {
            float value;
            int row, col;
        };
        std::vector<Peak> peaks;
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c)
            {
                const float v = spec.at(kGain, r, c);
                if (!(double(v) > options.min_gain))
                    continue;
                bool is_max = true;
                for (int dr = -1; dr <= 1 && is_max; ++dr)
                    for (int dc = -1; dc <= 1; ++dc)
                    {
                        if (dr == 0 && dc == 0)
                            continue;
                        int rr = r + dr, cc = c + dc;
                        if (rr < 0 || rr >= h)
                            continue;
                        if (cc < 0 || cc >= w)
                        {
                            if (!wrap)
                                continue;
                            cc = (cc + w) % w;
                        }
                        if (spec.at(kGain, rr, cc) > v)
                        {
                            is_max = false;
                            break;
                        }
                    }
                if (is_max)
                    peaks.push_back({v, r, c});
            }
        std::stable_sort(peaks.begin(), peaks.end(), [](const Peak &a, const Peak &b) { return a.value > b.value; });

        const double radius = options.nms_radius * spec.pixel_pitch();
        std::vector<MultipathComponent> out;
        std::vector<Vec3<double>> kept;
        for (const Peak &p : peaks)
        {
            if (int(out.size()) >= options.k)
                break;
            Vec3<double> dir = spec.pixel_direction(p.row, p.col);
            bool suppressed = false;
            for (const auto &d : kept)
                if (std::acos(std::clamp(dot(d, dir), -1.0, 1.0)) <= radius)
                {
                    suppressed = true;
                    break;
                }
            if (suppressed)
                continue;
            kept.push_back(dir);
            MultipathComponent m;
            m.aoa = dir;
            m.gain = double(p.value) * options.g_ref;
            m.tof = double(spec.at(kTof, p.row, p.col)) * options.tau_max;
            m.order = -1; // Unknown for extracted components
            out.push_back(std::move(m));
        }
        return out;
    }

    void ArrayGeometry::validate() const
    {
        if (count_u < 1 || (kind == ArrayKind::upa && count_v < 1))
            throw std::invalid_argument("array element counts must be at least 1");
        if (!(spacing > 0.0))
            throw std::invalid_argument("array spacing must be positive");
        if (!(norm(boresight) > 0.0))
            throw std::invalid_argument("array boresight must be non-zero");
    }

    std::vector<Vec3<double>> ArrayGeometry::element_positions(double wavelength) const
    {
        validate();
        const Vec3<double> b = normalized(boresight);
        Vec3<double> u = cross(Vec3<double>{0.0, 0.0, 1.0}, b);
        if (norm(u) < 1e-9)
            u = {0.0, 1.0, 0.0};
        u = normalized(u);
        const Vec3<double> v = cross(b, u);
        const double d = spacing * wavelength;
        std::vector<Vec3<double>> out;
        const int nv = kind == ArrayKind::ula ? 1 : count_v;
        for (int n = 0; n < nv; ++n)
            for (int m = 0; m < count_u; ++m)
                out.push_back(u * (d * m) + v * (d * n));
        return out;
    }

    ComplexVector steering_vector(const ArrayGeometry &arr, const Vec3<double> &dir, double wavelength)
    {
        const double k = 2.0 * kPi / wavelength;
        ComplexVector out;
        for (const auto &p : arr.element_positions(wavelength))
            out.push_back(std::polar(1.0, -k * dot(p, dir)));
        return out;
    }

    double array_gain(const ComplexVector &w, const ComplexVector &a)
    {
        if (w.size() != a.size())
            throw std::invalid_argument("beam and steering vector lengths differ");
        std::complex<double> s = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i)
            s += std::conj(w[i]) * a[i];
        return std::norm(s);
    }

    ComplexVector matched_beam(const ArrayGeometry &arr, const Vec3<double> &dir, double wavelength)
    {
        ComplexVector w = steering_vector(arr, dir, wavelength);
        const double inv = 1.0 / std::sqrt(double(w.size()));
        for (auto &x : w)
            x *= inv;
        return w;
    }

    BeamformReport beamform_report(const RRFModel &model, const RxPose &pose, const ArrayGeometry &arr,
                                   const BeamformOptions &options, const Scene *scene)
    {
        arr.validate();
        BeamformReport report;
        report.array = arr;
        report.wavelength = kSpeedOfLight / model.meta.carrier_freq;

        RadioSpatialSpectrum pano = render_panorama(model, pose, options.height);
        ExtractOptions eo;
        eo.k = options.k;
        eo.min_gain = options.min_gain;
        eo.nms_radius = options.nms_radius;
        eo.g_ref = model.meta.g_ref;
        eo.tau_max = model.meta.tau_max;
        auto mpcs = extract_mpcs(pano, eo);
        if (mpcs.empty())
            throw std::runtime_error("no multipath component above the gain threshold");

        const double lambda = report.wavelength;
        const ComplexVector w = matched_beam(arr, pose.to_local(mpcs[0].aoa), lambda);
        for (auto &m : mpcs)
        {
            double g = array_gain(w, steering_vector(arr, pose.to_local(m.aoa), lambda));
            report.entries.push_back({std::move(m), g});
        }
        report.achieved_gain = report.entries[0].array_gain;

        if (scene)
        {
            OracleComparison cmp;
            cmp.paths = trace_paths(*scene, pose.position, options.oracle_max_order);
            if (!cmp.paths.empty())
            {
                const auto &truth = cmp.paths[0];
                const auto &mine = report.entries[0].mpc;
                cmp.aoa_error = std::acos(std::clamp(dot(truth.aoa, mine.aoa), -1.0, 1.0));
                cmp.tof_error = std::abs(truth.tof - mine.tof);
                const ComplexVector a_true = steering_vector(arr, pose.to_local(truth.aoa), lambda);
                cmp.gain_on_true_aoa = array_gain(w, a_true);
                cmp.optimal_gain = array_gain(matched_beam(arr, pose.to_local(truth.aoa), lambda), a_true);
            }
            report.oracle = std::move(cmp);
        }
        return report;
    }

    namespace
    {
        nlohmann::json mpc_json(const MultipathComponent &m)
        {
            nlohmann::json j = {{"aoa", {m.aoa.x, m.aoa.y, m.aoa.z}},
                                {"gain", m.gain},
                                {"gain_db", 20.0 * std::log10(std::max(m.gain, 1e-300))},
                                {"tof_ns", m.tof * 1e9}};
            if (m.aod)
                j["aod"] = {m.aod->x, m.aod->y, m.aod->z};
            else
                j["aod"] = nullptr;
            if (m.order >= 0)
                j["order"] = m.order;
            return j;
        }

        double to_db(double v) { return 10.0 * std::log10(std::max(v, 1e-300)); }
    } // namespace

    std::string mpcs_json(const std::vector<MultipathComponent> &mpcs)
    {
        nlohmann::json out = nlohmann::json::array();
        for (const auto &m : mpcs)
        {
            nlohmann::json j = mpc_json(m);
            j["azimuth_deg"] = std::atan2(m.aoa.y, m.aoa.x) * 180.0 / kPi;
            j["elevation_deg"] = std::asin(std::clamp(m.aoa.z, -1.0, 1.0)) * 180.0 / kPi;
            out.push_back(j);
        }
        return out.dump(2);
    }

    std::string beamform_report_json(const BeamformReport &r)
    {
        using nlohmann::json;
        json arr = {{"kind", r.array.kind == ArrayKind::ula ? "ula" : "upa"},
                    {"count_u", r.array.count_u},
                    {"count_v", r.array.kind == ArrayKind::ula ? 1 : r.array.count_v},
                    {"spacing_wavelengths", r.array.spacing},
                    {"boresight", {r.array.boresight.x, r.array.boresight.y, r.array.boresight.z}},
                    {"elements", r.array.elements()}};
        json mpcs = json::array();
        for (const auto &e : r.entries)
        {
            json j = mpc_json(e.mpc);
            j["array_gain"] = e.array_gain;
            j["array_gain_db"] = to_db(e.array_gain);
            mpcs.push_back(j);
        }
        json out = {{"array", arr},
                    {"wavelength", r.wavelength},
                    {"mpcs", mpcs},
                    {"achieved_gain", r.achieved_gain},
                    {"achieved_gain_db", to_db(r.achieved_gain)}};
        if (r.oracle)
        {
            json paths = json::array();
            for (const auto &p : r.oracle->paths)
                paths.push_back(mpc_json(p));
            out["oracle"] = {{"paths", paths},
                             {"aoa_error_deg", r.oracle->aoa_error * 180.0 / kPi},
                             {"tof_error_ns", r.oracle->tof_error * 1e9},
                             {"gain_on_true_aoa", r.oracle->gain_on_true_aoa},
                             {"optimal_gain", r.oracle->optimal_gain},
                             {"gain_ratio", r.oracle->optimal_gain > 0.0
                                                ? r.oracle->gain_on_true_aoa / r.oracle->optimal_gain
                                                : 0.0}};
        }
        return out.dump(2);
    }

    RadioSpatialSpectrum ris_incident_query(const RRFModel &model, const RxPose &ris_pose, int height)
    {
        RadioSpatialSpectrum s = render_panorama(model, ris_pose, height);
        s.projection.ris_incident = true;
        return s;
    }

} // namespace rrf
