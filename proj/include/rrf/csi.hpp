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

#ifndef RRF_CSI_HPP
#define RRF_CSI_HPP

#include "rrf/model.hpp"
#include "rrf/oracle.hpp"
#include "rrf/spectrum.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace rrf
{
    struct ExtractOptions
    {
        int k = 8;                 // Maximum number of components
        double min_gain = 1e-3;    // Threshold on the gain channel value
        double nms_radius = 3.0;   // Suppression radius in pixel pitches (great-circle)
        double g_ref = 1.0;        // Converts the gain channel to linear amplitude
        double tau_max = 1e-7;     // Converts the tof channel to seconds
    };

    // Dominant components from the gain channel: local maxima above min_gain, greedy non-maximum
    // suppression, descending gain. AoD is left unset.
    std::vector<MultipathComponent> extract_mpcs(const RadioSpatialSpectrum &spec, const ExtractOptions &options);

    // JSON array of components (world-frame AoA, gain, ToF)
    std::string mpcs_json(const std::vector<MultipathComponent> &mpcs);

    enum class ArrayKind
    {
        ula,
        upa
    };

    // Planar or linear array in the pose-local frame. Element (m, n) sits at spacing * lambda * (m u + n v)
    // where u = normalize(up x boresight) and v = boresight x u. A ULA uses the u axis only.
    struct ArrayGeometry
    {
        ArrayKind kind = ArrayKind::ula;
        int count_u = 16;
        int count_v = 1;
        double spacing = 0.5; // [wavelengths]
        Vec3<double> boresight{1.0, 0.0, 0.0};

        int elements() const { return kind == ArrayKind::ula ? count_u : count_u * count_v; }
        void validate() const;
        std::vector<Vec3<double>> element_positions(double wavelength) const;
    };

    using ComplexVector = std::vector<std::complex<double>>;

    // exp(-j 2 pi / lambda <p_n, dir>) per element, dir in the array (pose-local) frame
    ComplexVector steering_vector(const ArrayGeometry &arr, const Vec3<double> &dir, double wavelength);

    // |w^H a|^2
    double array_gain(const ComplexVector &w, const ComplexVector &a);

    // Unit-norm matched beam a(dir) / sqrt(N)
    ComplexVector matched_beam(const ArrayGeometry &arr, const Vec3<double> &dir, double wavelength);

    struct BeamformEntry
    {
        MultipathComponent mpc;
        double array_gain = 0.0; // Of the beam toward the strongest component
    };

    struct OracleComparison
    {
        std::vector<MultipathComponent> paths;
        double aoa_error = 0.0;            // Angle between extracted and traced dominant AoA [rad]
        double tof_error = 0.0;            // |extracted - traced| dominant ToF [s]
        double gain_on_true_aoa = 0.0;     // Our beam evaluated on the traced dominant AoA
        double optimal_gain = 0.0;         // Matched beam on the traced dominant AoA
    };

    struct BeamformReport
    {
        ArrayGeometry array;
        double wavelength = 0.0;
        std::vector<BeamformEntry> entries;
        double achieved_gain = 0.0; // |w^H a(aoa_1)|^2 with the unit-norm matched beam, equal to N
        std::optional<OracleComparison> oracle;
    };

    struct BeamformOptions
    {
        int k = 4;
        int height = 128;        // Panorama height used for the query
        double min_gain = 1e-3;
        double nms_radius = 3.0;
        int oracle_max_order = 1;
    };

    // Renders a panorama at the pose, extracts components and beams toward the strongest one.
    // With a scene the extracted dominant path is compared against the traced paths.
    BeamformReport beamform_report(const RRFModel &model, const RxPose &pose, const ArrayGeometry &arr,
                                   const BeamformOptions &options, const Scene *scene = nullptr);

    std::string beamform_report_json(const BeamformReport &report);

    // Incident field at a RIS: the panorama at ris_pose, tagged as a RIS incident query
    RadioSpatialSpectrum ris_incident_query(const RRFModel &model, const RxPose &ris_pose, int height);

} // namespace rrf

#endif
