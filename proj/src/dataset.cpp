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

#include "rrf/dataset.hpp"
#include "rrf/csi.hpp"
#include "rrf/oracle.hpp"
#include "rrf/parallel.hpp"
#include "rrf/random.hpp"
#include "rrf/rasterizer.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace rrf
{
    using json = nlohmann::json;

    static double segment_distance(const Point3 &p, const Point3 &a, const Point3 &b)
    {
        const Point3 ab = b - a;
        const double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
        return norm(p - (a + ab * t));
    }

    double facet_distance(const Point3 &p, const Facet &facet)
    {
        const double sd = facet.signed_distance(p);
        const Point3 foot = p - facet.normal * sd;
        if (facet.contains(foot))
            return std::abs(sd);
        double d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 4; ++i)
            d = std::min(d, segment_distance(p, facet.vertices[std::size_t(i)], facet.vertices[std::size_t((i + 1) % 4)]));
        return d;
    }

    std::vector<RxPose> sample_poses(const Scene &scene, int n, double margin, std::uint64_t seed)
    {
        Rng rng(seed);
        std::vector<RxPose> out;
        const Aabb &box = scene.aabb;
        std::size_t attempts = 0;
        while (int(out.size()) < n)
        {
            if (++attempts > 1000000)
                throw std::runtime_error("cannot place poses with the requested margin");
            Point3 p{rng.uniform(box.min.x, box.max.x), rng.uniform(box.min.y, box.max.y),
                     rng.uniform(box.min.z, box.max.z)};
            double yaw = rng.uniform(-kPi, kPi);
            if (norm(p - scene.tx_position) < margin)
                continue;
            bool clear = true;
            for (const auto &f : scene.facets)
                if (facet_distance(p, f) < margin)
                {
                    clear = false;
                    break;
                }
            if (!clear)
                continue;
            RxPose pose;
            pose.position = p;
            pose.orientation = Quat<double>::from_yaw(yaw);
            out.push_back(pose);
        }
        return out;
    }

    RRFModel reference_visualization(const Scene &scene)
    {
        constexpr double kSpacing = 0.08;   // Grid pitch on each facet [m]
        constexpr double kThickness = 0.005; // Normal extent [m]
        constexpr double kChecker = 0.5;     // Texture square size [m]
        constexpr double kOpaque = 0.99;

        RRFModel model;
        model.sh_degree = 0;
        model.meta = scene_meta(scene);
        const float opaque_logit = float(logit(kOpaque));

        for (std::size_t fi = 0; fi < scene.facets.size(); ++fi)
        {
            const Facet &f = scene.facets[fi];
            const auto &v = f.vertices;
            const Point3 e1 = v[1] - v[0], e2 = v[3] - v[0];
            const int nu = std::max(1, int(std::ceil(norm(e1) / kSpacing)));
            const int nv = std::max(1, int(std::ceil(norm(e2) / kSpacing)));
            const Point3 u_axis = normalized(e1);
            const Point3 v_axis = cross(f.normal, u_axis);
            const Quat<double> rot = Quat<double>::from_matrix(Mat3<double>::from_columns(u_axis, v_axis, f.normal));
            const double su = 0.6 * norm(e1) / nu, sv = 0.6 * norm(e2) / nv;
            const double albedo = facet_albedo(fi);

            for (int j = 0; j < nv; ++j)
                for (int i = 0; i < nu; ++i)
                {
                    const double a = (i + 0.5) / nu, b = (j + 0.5) / nv;
                    // Bilinear interpolation of the corners
                    const Point3 p = v[0] * ((1 - a) * (1 - b)) + v[1] * (a * (1 - b)) + v[2] * (a * b) + v[3] * ((1 - a) * b);
                    const int cu = int(std::floor(a * norm(e1) / kChecker)), cv = int(std::floor(b * norm(e2) / kChecker));
                    const double shade = albedo + ((cu + cv) % 2 == 0 ? 0.1 : -0.1);

                    GaussianPrimitive<float> g;
                    g.position = Vec3<float>(p);
                    g.log_scale = {float(std::log(su)), float(std::log(sv)), float(std::log(kThickness))};
                    g.rotation = Quat<float>(rot);
                    g.opacity_logit = opaque_logit;
                    g.coeff(kVisual, 0) = float(sh_dc_for_value(shade));
                    model.gaussians.push_back(g);
                }
        }

        GaussianPrimitive<float> marker;
        marker.position = Vec3<float>(scene.tx_position);
        const float ls = float(std::log(0.05));
        marker.log_scale = {ls, ls, ls};
        marker.opacity_logit = opaque_logit;
        marker.coeff(kVisual, 0) = float(sh_dc_for_value(1.0));
        model.gaussians.push_back(marker);
        return model;
    }

    // --------------------------------------------------------------------------------------------
    // Manifest

    static const char *split_name(Split s) { return s == Split::train ? "train" : "test"; }

    void write_manifest(const DatasetManifest &m, const std::string &path)
    {
        json records = json::array();
        for (const auto &r : m.records)
        {
            auto pose = r.pose.packed();
            records.push_back({{"pose", pose},
                               {"spectrum", r.spectrum_path},
                               {"visual", r.visual_path ? json(*r.visual_path) : json(nullptr)},
                               {"split", split_name(r.split)}});
        }
        json j = {{"format", "rrf-dataset"},
                  {"version", 1},
                  {"scene", m.scene_path},
                  {"resolution", m.resolution},
                  {"channels", kChannelNames},
                  {"visual_resolution", m.visual_resolution},
                  {"visual_fov", m.visual_fov},
                  {"max_order", m.max_order},
                  {"carrier_freq", m.carrier_freq},
                  {"tau_max", m.tau_max},
                  {"g_ref", m.g_ref},
                  {"seed", m.seed},
                  {"records", records}};
        std::ofstream out(path);
        out << j.dump(2) << "\n";
        if (!out)
            throw std::runtime_error("cannot write manifest '" + path + "'");
    }

    DatasetManifest read_manifest(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open manifest '" + path + "'");
        DatasetManifest m;
        const fs::path dir = fs::path(path).parent_path();
        try
        {
            json j = json::parse(in);
            if (j.value("format", "") != "rrf-dataset")
                throw std::runtime_error("not an rrf dataset manifest");
            m.scene_path = j.at("scene").get<std::string>();
            m.resolution = j.at("resolution").get<int>();
            m.visual_resolution = j.at("visual_resolution").get<int>();
            m.visual_fov = j.at("visual_fov").get<double>();
            m.max_order = j.at("max_order").get<int>();
            m.carrier_freq = j.at("carrier_freq").get<double>();
            m.tau_max = j.at("tau_max").get<double>();
            m.g_ref = j.at("g_ref").get<double>();
            m.seed = j.at("seed").get<std::uint64_t>();
            for (const auto &r : j.at("records"))
            {
                DatasetRecord rec;
                rec.pose = RxPose::unpacked(r.at("pose").get<std::array<float, 7>>());
                rec.spectrum_path = r.at("spectrum").get<std::string>();
                if (!r.at("visual").is_null())
                    rec.visual_path = r.at("visual").get<std::string>();
                const std::string split = r.at("split").get<std::string>();
                if (split != "train" && split != "test")
                    throw std::runtime_error("unknown split '" + split + "'");
                rec.split = split == "train" ? Split::train : Split::test;
                m.records.push_back(std::move(rec));
            }
        }
        catch (const json::exception &e)
        {
            throw std::runtime_error("manifest '" + path + "': " + e.what());
        }

        if (!fs::exists(dir / m.scene_path))
            throw std::runtime_error("manifest references missing scene '" + m.scene_path + "'");
        for (const auto &r : m.records)
        {
            RadioSpatialSpectrum s = read_spectrum((dir / r.spectrum_path).string());
            if (s.height != m.resolution || s.width != 2 * m.resolution)
                throw std::runtime_error("record '" + r.spectrum_path + "' has a mismatched resolution");
            if (r.visual_path)
            {
                RadioSpatialSpectrum v = read_spectrum((dir / *r.visual_path).string());
                if (v.height != m.visual_resolution || v.width != m.visual_resolution)
                    throw std::runtime_error("record '" + *r.visual_path + "' has a mismatched resolution");
            }
        }
        return m;
    }

    DatasetManifest gen_dataset(const Scene &scene, const std::string &directory, const DatasetOptions &o)
    {
        scene.validate();
        if (o.n_train < 0 || o.n_test < 0 || o.n_train + o.n_test <= 0)
            throw std::invalid_argument("dataset needs a positive number of poses");
        if (o.resolution <= 0 || o.resolution % 16 != 0)
            throw std::invalid_argument("panorama resolution must be a positive multiple of 16");
        if (o.visual_resolution <= 0 || o.visual_resolution % 8 != 0)
            throw std::invalid_argument("visual resolution must be a positive multiple of 8");

        std::error_code ec;
        fs::create_directories(fs::path(directory) / "train", ec);
        fs::create_directories(fs::path(directory) / "test", ec);
        if (ec || !fs::is_directory(directory))
            throw std::runtime_error("cannot create dataset directory '" + directory + "'");

        DatasetManifest m;
        m.resolution = o.resolution;
        m.visual_resolution = o.visual_resolution;
        m.visual_fov = o.visual_fov;
        m.max_order = o.max_order;
        m.carrier_freq = scene.carrier_freq;
        m.tau_max = scene.tau_max;
        m.g_ref = scene.g_ref;
        m.seed = o.seed;

        const int total = o.n_train + o.n_test;
        const auto poses = sample_poses(scene, total, o.margin, o.seed);
        for (int i = 0; i < total; ++i)
        {
            DatasetRecord r;
            // Poses go through the manifest's float storage so records reload exactly
            r.pose = RxPose::unpacked(poses[std::size_t(i)].packed());
            r.split = i < o.n_train ? Split::train : Split::test;
            const int local = i < o.n_train ? i : i - o.n_train;
            char name[32];
            std::snprintf(name, sizeof name, "%05d", local);
            const std::string prefix = std::string(split_name(r.split)) + "/" + name;
            r.spectrum_path = prefix + ".rrfs";
            r.visual_path = prefix + "_view.rrfs";
            m.records.push_back(std::move(r));
        }

        const RRFModel reference = reference_visualization(scene);
        parallel_for(m.records.size(), [&](std::size_t i)
                     {
                         const auto &r = m.records[i];
                         auto mpcs = trace_paths(scene, r.pose.position, o.max_order);
                         RadioSpatialSpectrum spec = splat_oracle_spectrum(mpcs, r.pose, o.resolution, 2 * o.resolution,
                                                                           scene.g_ref, scene.tau_max);
                         write_spectrum(spec, (fs::path(directory) / r.spectrum_path).string());
                         PinholeCamera cam = forward_camera(r.pose, o.visual_fov, o.visual_resolution);
                         RadioSpatialSpectrum view = render_view(reference, cam);
                         write_spectrum(view, (fs::path(directory) / *r.visual_path).string());
                     });
        save_scene(scene, (fs::path(directory) / m.scene_path).string());
        write_manifest(m, (fs::path(directory) / "manifest.json").string());
        return m;
    }

    Dataset Dataset::load(const std::string &manifest_path)
    {
        Dataset d;
        d.directory = fs::path(manifest_path).parent_path().string();
        d.manifest = read_manifest(manifest_path);
        d.scene = load_scene(d.path(d.manifest.scene_path));
        return d;
    }

    std::string Dataset::path(const std::string &relative) const { return (fs::path(directory) / relative).string(); }

    std::vector<const DatasetRecord *> Dataset::records(Split split) const
    {
        std::vector<const DatasetRecord *> out;
        for (const auto &r : manifest.records)
            if (r.split == split)
                out.push_back(&r);
        return out;
    }

    std::vector<VisualSample> Dataset::visual_samples(Split split) const
    {
        std::vector<VisualSample> out;
        for (const auto *r : records(split))
            if (r->visual_path)
            {
                VisualSample s;
                s.camera = forward_camera(r->pose, manifest.visual_fov, manifest.visual_resolution);
                s.target = read_spectrum(path(*r->visual_path));
                s.target.projection.fov = manifest.visual_fov;
                out.push_back(std::move(s));
            }
        return out;
    }

    std::vector<SpectrumSample> Dataset::spectrum_samples(Split split) const
    {
        std::vector<SpectrumSample> out;
        for (const auto *r : records(split))
            out.push_back({r->pose, read_spectrum(path(r->spectrum_path))});
        return out;
    }

    // --------------------------------------------------------------------------------------------
    // Evaluation

    double psnr(std::span<const float> a, std::span<const float> b, double peak)
    {
        if (a.size() != b.size() || a.empty())
            throw std::invalid_argument("psnr: size mismatch");
        double mse = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            double d = double(a[i]) - double(b[i]);
            mse += d * d;
        }
        mse /= double(a.size());
        if (mse == 0.0)
            return 99.0;
        return std::min(99.0, 10.0 * std::log10(peak * peak / mse));
    }

    static std::span<const float> plane(const RadioSpatialSpectrum &s, int ch)
    {
        return {s.data.data() + std::size_t(ch) * s.plane_size(), s.plane_size()};
    }

    EvalReport evaluate(const RRFModel &model, const Dataset &dataset, Split split, bool timing)
    {
        const auto recs = dataset.records(split);
        if (recs.empty())
            throw std::invalid_argument("evaluation split is empty");
        const auto &m = dataset.manifest;
        EvalReport report;
        report.poses.resize(recs.size());
        std::vector<double> latency;

        for (std::size_t i = 0; i < recs.size(); ++i)
        {
            const auto &r = *recs[i];
            PoseMetrics &pm = report.poses[i];
            const RadioSpatialSpectrum target = read_spectrum(dataset.path(r.spectrum_path));

            auto t0 = std::chrono::steady_clock::now();
            const RadioSpatialSpectrum pano = render_panorama(model, r.pose, m.resolution);
            latency.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());

            float peak = 0.0f;
            for (float v : plane(target, kGain))
                peak = std::max(peak, v);
            pm.psnr_gain = psnr(plane(pano, kGain), plane(target, kGain), peak > 0.0f ? peak : 1.0);
            pm.psnr_tof = psnr(plane(pano, kTof), plane(target, kTof), 1.0);

            if (r.visual_path)
            {
                const RadioSpatialSpectrum vt = read_spectrum(dataset.path(*r.visual_path));
                const RadioSpatialSpectrum view =
                    render_view(model, forward_camera(r.pose, m.visual_fov, m.visual_resolution));
                pm.psnr_visual = psnr(plane(view, kVisual), plane(vt, kVisual), 1.0);
                pm.ssim_visual = ssim(plane(view, kVisual).data(), plane(vt, kVisual).data(), vt.height, vt.width);
            }

            const auto truth = trace_paths(dataset.scene, r.pose.position, m.max_order);
            ExtractOptions eo;
            eo.k = 1;
            eo.min_gain = 0.0;
            eo.g_ref = m.g_ref;
            eo.tau_max = m.tau_max;
            const auto found = extract_mpcs(pano, eo);
            const double pitch = kPi / double(m.resolution);
            if (!found.empty() && !truth.empty())
            {
                pm.found = true;
                pm.aoa_error = std::acos(std::clamp(dot(found[0].aoa, truth[0].aoa), -1.0, 1.0));
            }
            else
            {
                pm.aoa_error = kPi;
            }
            pm.aoa_error_pixels = pm.aoa_error / pitch;
            if (!truth.empty())
            {
                auto px = equirect_pixel(r.pose.to_local(truth[0].aoa), m.resolution, 2 * m.resolution);
                pm.tof_error = std::abs(double(pano.at(kTof, px.row, px.col)) - double(target.at(kTof, px.row, px.col)));
            }
        }

        const double n = double(report.poses.size());
        int n_visual = 0, within = 0;
        std::vector<double> aoa;
        for (const auto &p : report.poses)
        {
            if (p.psnr_visual >= 0.0)
            {
                report.mean_psnr_visual += p.psnr_visual;
                report.mean_ssim_visual += p.ssim_visual;
                ++n_visual;
            }
            report.mean_psnr_gain += p.psnr_gain / n;
            report.mean_psnr_tof += p.psnr_tof / n;
            report.mean_tof_error += p.tof_error / n;
            within += p.aoa_error_pixels <= 2.0 ? 1 : 0;
            aoa.push_back(p.aoa_error_pixels);
        }
        if (n_visual > 0)
        {
            report.mean_psnr_visual /= n_visual;
            report.mean_ssim_visual /= n_visual;
        }
        report.fraction_aoa_within_2px = within / n;
        std::sort(aoa.begin(), aoa.end());
        report.median_aoa_error_pixels = aoa[aoa.size() / 2];
        if (timing)
        {
            std::sort(latency.begin(), latency.end());
            report.latency_median_ms = latency[latency.size() / 2];
            report.latency_p95_ms = latency[std::min(latency.size() - 1, std::size_t(std::ceil(0.95 * n)) - 1)];
        }
        return report;
    }

    std::string eval_report_json(const EvalReport &r)
    {
        json poses = json::array();
        for (const auto &p : r.poses)
        {
            json j = {{"psnr_gain", p.psnr_gain},
                      {"psnr_tof", p.psnr_tof},
                      {"aoa_error_deg", p.aoa_error * 180.0 / kPi},
                      {"aoa_error_pixels", p.aoa_error_pixels},
                      {"tof_error", p.tof_error},
                      {"found", p.found}};
            if (p.psnr_visual >= 0.0)
            {
                j["psnr_visual"] = p.psnr_visual;
                j["ssim_visual"] = p.ssim_visual;
            }
            poses.push_back(j);
        }
        json out = {{"mean_psnr_visual", r.mean_psnr_visual},
                    {"mean_ssim_visual", r.mean_ssim_visual},
                    {"mean_psnr_gain", r.mean_psnr_gain},
                    {"mean_psnr_tof", r.mean_psnr_tof},
                    {"median_aoa_error_pixels", r.median_aoa_error_pixels},
                    {"fraction_aoa_within_2px", r.fraction_aoa_within_2px},
                    {"mean_tof_error", r.mean_tof_error},
                    {"poses", poses}};
        if (r.latency_median_ms)
            out["latency_ms"] = {{"median", *r.latency_median_ms}, {"p95", *r.latency_p95_ms}};
        return out.dump(2);
    }

} // namespace rrf
