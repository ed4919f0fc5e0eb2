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

#ifndef RRF_DATASET_HPP
#define RRF_DATASET_HPP

#include "rrf/model.hpp"
#include "rrf/scene.hpp"
#include "rrf/trainer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rrf
{
    enum class Split
    {
        train,
        test
    };

    struct DatasetRecord
    {
        RxPose pose;
        std::string spectrum_path;               // Relative to the dataset directory
        std::optional<std::string> visual_path;  // Relative to the dataset directory
        Split split = Split::train;
    };

    struct DatasetManifest
    {
        std::string scene_path = "scene.json";
        int resolution = 128;          // Panorama height; width is twice this
        int visual_resolution = 128;   // Pinhole view size
        double visual_fov = kPi / 2.0;
        int max_order = 1;
        double carrier_freq = 28e9;
        double tau_max = 1e-7;
        double g_ref = 1.0;
        std::uint64_t seed = 0;
        std::vector<DatasetRecord> records;
    };

    struct DatasetOptions
    {
        int n_train = 200;
        int n_test = 30;
        int resolution = 128;
        int visual_resolution = 128;
        double visual_fov = kPi / 2.0;
        int max_order = 1;
        std::uint64_t seed = 0;
        double margin = 0.2; // Minimum distance of a pose from any facet and from the transmitter [m]
    };

    // Euclidean distance from a point to a facet quad
    double facet_distance(const Point3 &p, const Facet &facet);

    // Poses uniform in the aabb, at least "margin" from every facet and from the transmitter, with uniform yaw
    std::vector<RxPose> sample_poses(const Scene &scene, int n, double margin, std::uint64_t seed);

    // Visual stand-in for the scene: facets tiled with thin opaque Gaussians carrying a per-facet albedo
    // and a checker texture, plus a bright marker at the transmitter
    RRFModel reference_visualization(const Scene &scene);

    // Writes spectra, visual views, scene.json and manifest.json into "directory"
    DatasetManifest gen_dataset(const Scene &scene, const std::string &directory, const DatasetOptions &options);

    void write_manifest(const DatasetManifest &manifest, const std::string &path);

    // Parses and validates (every file exists and has the declared shape)
    DatasetManifest read_manifest(const std::string &path);

    struct Dataset
    {
        std::string directory;
        DatasetManifest manifest;
        Scene scene;

        static Dataset load(const std::string &manifest_path);

        std::vector<VisualSample> visual_samples(Split split) const;
        std::vector<SpectrumSample> spectrum_samples(Split split) const;
        std::vector<const DatasetRecord *> records(Split split) const;
        std::string path(const std::string &relative) const;
    };

    struct PoseMetrics
    {
        double psnr_visual = -1.0; // -1 when the record has no visual view
        double ssim_visual = -1.0;
        double psnr_gain = 0.0;
        double psnr_tof = 0.0;
        double aoa_error = 0.0;        // [rad], dominant component
        double aoa_error_pixels = 0.0; // In units of the panorama pixel pitch
        double tof_error = 0.0;        // |rendered - target| tof_norm at the dominant-path pixel
        bool found = false;            // A component was extracted
    };

    struct EvalReport
    {
        std::vector<PoseMetrics> poses;
        double mean_psnr_visual = 0.0, mean_ssim_visual = 0.0, mean_psnr_gain = 0.0, mean_psnr_tof = 0.0;
        double median_aoa_error_pixels = 0.0;
        double fraction_aoa_within_2px = 0.0;
        double mean_tof_error = 0.0;
        std::optional<double> latency_median_ms, latency_p95_ms;
    };

    // Capped at 99 dB for identical inputs
    double psnr(std::span<const float> a, std::span<const float> b, double peak);

    EvalReport evaluate(const RRFModel &model, const Dataset &dataset, Split split, bool timing = false);
    std::string eval_report_json(const EvalReport &report);

} // namespace rrf

#endif
