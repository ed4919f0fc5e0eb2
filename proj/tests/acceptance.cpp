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

// Acceptance suite. Runs every numbered criterion (or those named on the command line) and
// prints one PASS/FAIL line per criterion. Exit status is nonzero if any criterion fails.

#include "rrf/csi.hpp"
#include "rrf/dataset.hpp"
#include "rrf/gradcheck.hpp"
#include "rrf/parallel.hpp"
#include "rrf/random.hpp"
#include "rrf/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace rrf;

namespace
{
    using Clock = std::chrono::steady_clock;

    double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

    struct Outcome
    {
        bool pass = false;
        std::string detail;
    };

    std::string fmt(const char *f, auto... args)
    {
        char buf[512];
        std::snprintf(buf, sizeof buf, f, args...);
        return buf;
    }

    Scene box_scene() { return make_box_scene({5.0, 4.0, 3.0}, {1.3, 1.1, 2.1}); }

    fs::path work_dir()
    {
        fs::path p = fs::temp_directory_path() / "rrf_acceptance";
        fs::create_directories(p);
        return p;
    }

    // ----------------------------------------------------------------------------------------
    // 1: gradients against central differences

    Outcome gradient_oracle()
    {
        GradcheckOptions o;
        o.primitives = 100;
        o.resolution = 32;
        std::array<double, kNumParamGroups> worst{};
        std::size_t checked = 0, skipped = 0;
        auto t0 = Clock::now();
        for (std::uint64_t seed = 1; seed <= 20; ++seed)
        {
            GradcheckReport r = gradcheck(seed, o);
            for (int g = 0; g < kNumParamGroups; ++g)
                worst[std::size_t(g)] = std::max(worst[std::size_t(g)], r.group_max[std::size_t(g)]);
            checked += r.checked;
            skipped += r.skipped;
        }
        double t = seconds_since(t0);
        double all = *std::max_element(worst.begin(), worst.end());
        std::string per;
        for (int g = 0; g < kNumParamGroups; ++g)
            per += fmt(" %s=%.1e", kParamGroupNames[std::size_t(g)], worst[std::size_t(g)]);
        return {all <= 1e-3 && t <= 120.0,
                fmt("20 models x 100 primitives, max rel error %.2e (limit 1e-3),", all) + per +
                    fmt("; %zu stencils checked, %zu straddling a compositing discontinuity skipped; %.1f s (limit 120 s)",
                        checked, skipped, t)};
    }

    // ----------------------------------------------------------------------------------------
    // 2: one near-opaque primitive per traced interaction point reproduces the oracle spectrum

    Outcome rendering_round_trip()
    {
        Scene scene = box_scene();
        // Fine panorama so that neighbouring paths rarely share a footprint
        const int H = 512, W = 1024;
        // Angular size of each primitive: 4 cube-face pixels (face resolution 256, focal 128 px)
        const double sigma_angle = 4.0 / 128.0;
        const double pitch = kPi / H;
        const double separation = 6.0 * sigma_angle;
        int compared = 0, isolated_skipped = 0, position_fail = 0, amplitude_fail = 0;
        double worst_amp = 0.0;
        double worst_pos = 0.0;

        for (const auto &pose : sample_poses(scene, 30, 0.2, 101))
        {
            auto paths = trace_paths(scene, pose.position, 1);
            RRFModel model;
            model.meta = scene_meta(scene);
            for (const auto &p : paths)
            {
                Point3 hit = p.bounces.empty() ? scene.tx_position : p.bounces.back();
                double dist = norm(hit - pose.position);
                GaussianPrimitive<float> g;
                g.position = Vec3<float>(hit);
                float ls = float(std::log(dist * sigma_angle));
                g.log_scale = {ls, ls, ls};
                g.opacity_logit = float(logit(0.999));
                g.coeff(kGain, 0) = float(sh_dc_for_value(p.gain / scene.g_ref));
                g.coeff(kTof, 0) = float(sh_dc_for_value(p.tof / scene.tau_max));
                model.gaussians.push_back(g);
            }
            auto rendered = render_panorama(model, pose, H);
            auto oracle = splat_oracle_spectrum(paths, pose, H, W, scene.g_ref, scene.tau_max);

            for (std::size_t i = 0; i < paths.size(); ++i)
            {
                bool isolated = true;
                for (std::size_t j = 0; j < paths.size(); ++j)
                    if (j != i && std::acos(std::clamp(dot(paths[i].aoa, paths[j].aoa), -1.0, 1.0)) < separation)
                        isolated = false;
                if (!isolated)
                {
                    ++isolated_skipped;
                    continue;
                }
                auto px = equirect_pixel(pose.to_local(paths[i].aoa), H, W);
                double truth = oracle.at(kGain, px.row, px.col);
                // Rendered peak: maximum within a 7x7 window around the oracle pixel
                double best = -1.0;
                int br = 0, bc = 0;
                for (int dr = -3; dr <= 3; ++dr)
                    for (int dc = -3; dc <= 3; ++dc)
                    {
                        int r = px.row + dr, c = ((px.col + dc) % W + W) % W;
                        if (r < 0 || r >= H)
                            continue;
                        if (rendered.at(kGain, r, c) > best)
                        {
                            best = rendered.at(kGain, r, c);
                            br = dr;
                            bc = dc;
                        }
                    }
                // Great-circle offset between rendered and oracle peak pixels, in pixel pitches
                const auto d0 = rendered.pixel_direction(px.row, px.col);
                const auto d1 = rendered.pixel_direction(px.row + br, ((px.col + bc) % W + W) % W);
                double pos_err = std::acos(std::clamp(dot(d0, d1), -1.0, 1.0)) / pitch;
                // One pixel: the 8-neighbourhood, or one pitch on the sphere where columns crowd near the poles
                bool pos_ok = std::max(std::abs(br), std::abs(bc)) <= 1 || pos_err <= 1.0;
                double amp_err = std::abs(best - truth) / truth;
                if (std::getenv("RRF_ACCEPTANCE_VERBOSE") && (!pos_ok || amp_err > 0.05))
                    std::printf("  [info] order %d at (%d,%d): peak offset (%d,%d) = %.2f pitch, amplitude %.4f vs %.4f\n",
                                paths[i].order, px.row, px.col, br, bc, pos_err, best, truth);
                worst_pos = std::max(worst_pos, pos_err);
                worst_amp = std::max(worst_amp, amp_err);
                position_fail += pos_ok ? 0 : 1;
                amplitude_fail += amp_err > 0.05 ? 1 : 0;
                ++compared;
            }
        }
        return {compared > 0 && position_fail == 0 && amplitude_fail == 0,
                fmt("H=%d: %d isolated peaks over 30 poses (%d closer than %.0f deg to another path not compared); "
                    "%d peaks outside one pixel of the oracle peak, worst great-circle offset %.2f pitch, worst amplitude error %.2f%% (limit 5%%)",
                    H, compared, isolated_skipped, separation * 180.0 / kPi, position_fail, worst_pos, 100.0 * worst_amp)};
    }

    // ----------------------------------------------------------------------------------------
    // 3: extraction recovers traced paths from oracle spectra

    Outcome extraction_round_trip()
    {
        Scene scene = box_scene();
        const int H = 128, W = 256;
        ExtractOptions eo;
        eo.k = 64;
        eo.min_gain = 1e-9;
        eo.nms_radius = 3.0;
        eo.g_ref = scene.g_ref;
        eo.tau_max = scene.tau_max;
        const double pitch = kPi / H;
        int poses = 0, skipped = 0, failures = 0, paths_total = 0;
        double worst_aoa = 0.0, worst_gain = 0.0;
        for (int order : {1, 2})
            for (const auto &pose : sample_poses(scene, 100, 0.2, 300 + std::uint64_t(order)))
            {
                auto paths = trace_paths(scene, pose.position, order);
                bool separated = true;
                for (std::size_t i = 0; i < paths.size() && separated; ++i)
                    for (std::size_t j = i + 1; j < paths.size(); ++j)
                        if (std::acos(std::clamp(dot(paths[i].aoa, paths[j].aoa), -1.0, 1.0)) <=
                            2.0 * eo.nms_radius * pitch)
                        {
                            separated = false;
                            break;
                        }
                if (!separated)
                {
                    ++skipped;
                    continue;
                }
                ++poses;
                auto spec = splat_oracle_spectrum(paths, pose, H, W, scene.g_ref, scene.tau_max);
                auto found = extract_mpcs(spec, eo);
                if (found.size() != paths.size())
                {
                    ++failures;
                    continue;
                }
                paths_total += int(paths.size());
                std::vector<bool> used(found.size(), false);
                for (const auto &p : paths)
                {
                    // Brute-force nearest extracted component
                    double best = 1e9;
                    std::size_t bi = 0;
                    for (std::size_t k = 0; k < found.size(); ++k)
                    {
                        double a = std::acos(std::clamp(dot(p.aoa, found[k].aoa), -1.0, 1.0));
                        if (!used[k] && a < best)
                        {
                            best = a;
                            bi = k;
                        }
                    }
                    used[bi] = true;
                    double gerr = std::abs(found[bi].gain - p.gain) / p.gain;
                    worst_aoa = std::max(worst_aoa, best / pitch);
                    worst_gain = std::max(worst_gain, gerr);
                    if (best > pitch || gerr > 1e-6)
                        ++failures;
                }
            }
        return {poses > 0 && failures == 0,
                fmt("%d poses (orders 1 and 2; %d with paths closer than 2 x nms radius excluded), %d paths, "
                    "%d mismatches; worst AoA error %.2f px (limit 1), worst gain error %.1e (limit 1e-6)",
                    poses, skipped, paths_total, failures, worst_aoa, worst_gain)};
    }

    // ----------------------------------------------------------------------------------------
    // 4 and 9: end-to-end reconstruction and beamforming on the trained model

    struct EndToEnd
    {
        std::optional<Dataset> dataset;
        RRFModel model;
        double train_seconds = 0.0;
        bool ready = false;
    };

    EndToEnd &end_to_end()
    {
        static EndToEnd e2e;
        if (e2e.ready)
            return e2e;
        Scene scene = box_scene();
        fs::path dir = work_dir() / "e2e_dataset";
        fs::remove_all(dir);
        DatasetOptions o;
        o.n_train = 200;
        o.n_test = 30;
        o.resolution = 128;
        o.max_order = 1;
        o.seed = 2024;
        gen_dataset(scene, dir.string(), o);
        e2e.dataset = Dataset::load((dir / "manifest.json").string());

        TrainConfig config;
        config.scene_diagonal = scene.aabb.diagonal();
        std::ofstream log(work_dir() / "e2e_train_log.jsonl");
        auto t0 = Clock::now();
        e2e.model = initial_model(scene, config);
        train_stage1(e2e.model, e2e.dataset->visual_samples(Split::train), config, {&log, true});
        double t1 = seconds_since(t0);
        train_stage2(e2e.model, e2e.dataset->spectrum_samples(Split::train), config, {&log, true});
        e2e.train_seconds = seconds_since(t0);
        std::printf("  [info] training: stage 1 %.0f s, stage 2 %.0f s, %zu primitives, %d threads\n", t1,
                    e2e.train_seconds - t1, e2e.model.size(), thread_count());
        write_model(e2e.model, (work_dir() / "e2e_model.rrfg").string());
        e2e.ready = true;
        return e2e;
    }

    Outcome end_to_end_reconstruction()
    {
        auto &e = end_to_end();
        EvalReport r = evaluate(e.model, *e.dataset, Split::test);
        {
            std::ofstream out(work_dir() / "e2e_eval.json");
            out << eval_report_json(r) << "\n";
        }
        const double tof_limit = 0.02; // Normalized by tau_max
        bool ok = r.mean_psnr_gain >= 25.0 && r.fraction_aoa_within_2px >= 0.9 && r.mean_tof_error <= tof_limit &&
                  e.train_seconds <= 1800.0;
        return {ok, fmt("gain PSNR %.2f dB (min 25), AoA within 2 px on %.0f%% of test poses (min 90%%, median "
                        "error %.2f px), ToF error %.4f tau_max (max 0.02), training %.0f s on %d thread(s) "
                        "(max 1800 s; visual PSNR %.2f dB)",
                        r.mean_psnr_gain, 100.0 * r.fraction_aoa_within_2px, r.median_aoa_error_pixels,
                        r.mean_tof_error, e.train_seconds, thread_count(), r.mean_psnr_visual)};
    }

    Outcome beamforming_sanity()
    {
        auto &e = end_to_end();
        const Dataset &ds = *e.dataset;
        ArrayGeometry ula;
        ula.count_u = 16;
        ula.spacing = 0.5;
        BeamformOptions bo;
        bo.height = ds.manifest.resolution;
        int los_poses = 0, individual_ok = 0;
        double ratio_sum = 0.0, worst = 1.0;
        for (const auto *rec : ds.records(Split::test))
        {
            auto paths = trace_paths(ds.scene, rec->pose.position, ds.manifest.max_order);
            if (paths.empty() || paths[0].order != 0)
                continue;
            ++los_poses;
            double ratio = 0.0;
            try
            {
                auto report = beamform_report(e.model, rec->pose, ula, bo, &ds.scene);
                ratio = report.oracle->gain_on_true_aoa / report.oracle->optimal_gain;
            }
            catch (const std::exception &)
            {
                ratio = 0.0; // Nothing extracted
            }
            ratio_sum += ratio;
            worst = std::min(worst, ratio);
            individual_ok += ratio >= 0.95 ? 1 : 0;
        }
        double mean = los_poses > 0 ? ratio_sum / los_poses : 0.0;
        return {los_poses > 0 && mean >= 0.95,
                fmt("%d LoS-dominant test poses, mean matched-beam gain %.1f%% of the oracle single-path gain "
                    "(min 95%%); %d/%d poses individually >= 95%%, worst %.1f%%",
                    los_poses, 100.0 * mean, individual_ok, los_poses, 100.0 * worst)};
    }

    // ----------------------------------------------------------------------------------------
    // 5: render latency

    Outcome render_latency()
    {
        Scene scene = box_scene();
        InitOptions io;
        io.initial_alpha = 0.6;
        RRFModel model = init_model(scene, 50000, 0, 5, io);
        RxPose pose;
        pose.position = 0.5 * (scene.aabb.min + scene.aabb.max);
        PinholeCamera cam = forward_camera(pose, kPi / 2.0, 128);
        for (int i = 0; i < 10; ++i)
            (void)rasterize(model, cam);
        std::vector<double> ms;
        for (int i = 0; i < 100; ++i)
        {
            auto t0 = Clock::now();
            (void)rasterize(model, cam);
            ms.push_back(1e3 * seconds_since(t0));
        }
        std::sort(ms.begin(), ms.end());
        double median = 0.5 * (ms[49] + ms[50]), p95 = ms[94];
        return {median <= 10.0 && p95 <= 25.0,
                fmt("128x128 view of 50000 primitives on %d thread(s): median %.2f ms (max 10), p95 %.2f ms (max 25)",
                    thread_count(), median, p95)};
    }

    // ----------------------------------------------------------------------------------------
    // 6: compositing invariants on random lists and on real rendered views

    Outcome compositing_invariants()
    {
        Rng rng(606);
        RasterSettings s;
        RasterSettings no_exit = s;
        no_exit.t_stop = 0.0;
        double worst_sum = 0.0, worst_occl = 0.0, worst_exit = 0.0;
        bool monotone = true, bounded = true;
        std::size_t pixels = 0;

        auto check_list = [&](std::span<const ProjectedGaussian<double>> list, int row, int col)
        {
            double px = col + 0.5, py = row + 0.5, trans = 1.0, wsum = 0.0;
            for (const auto &p : list)
            {
                double a = contribution_alpha(p, px, py, s);
                if (a == 0.0)
                    continue;
                double w = a * trans;
                bounded = bounded && w >= 0.0 && w <= 1.0;
                wsum += w;
                double next = trans * (1.0 - a);
                monotone = monotone && next <= trans;
                trans = next;
                if (trans < s.t_stop)
                    break;
            }
            auto res = blend_pixel(list, row, col, s);
            bounded = bounded && res.transmittance >= 0.0 && res.transmittance <= 1.0;
            worst_sum = std::max(worst_sum, std::abs(wsum - (1.0 - res.transmittance)));
            auto full = blend_pixel(list, row, col, no_exit);
            for (int c = 0; c < kNumChannels; ++c)
                worst_exit = std::max(worst_exit, std::abs(res.values[std::size_t(c)] - full.values[std::size_t(c)]));

            // Occluder in front of everything
            std::vector<ProjectedGaussian<double>> occluded;
            ProjectedGaussian<double> front;
            front.mean2d = {px, py};
            front.cov2d = {1.0, 0.0, 1.0};
            front.conic = {1.0, 0.0, 1.0};
            front.extent = {3.0, 3.0};
            front.alpha = 0.999;
            front.depth = -1.0;
            occluded.push_back(front);
            occluded.insert(occluded.end(), list.begin(), list.end());
            auto o = blend_pixel<double>(occluded, row, col, s);
            for (int c = 0; c < kNumChannels; ++c)
                if (res.values[std::size_t(c)] > 0.0)
                    worst_occl = std::max(worst_occl, o.values[std::size_t(c)] / res.values[std::size_t(c)]);
            ++pixels;
        };

        for (int trial = 0; trial < 20000; ++trial)
        {
            int n = 1 + int(rng.below(120));
            std::vector<ProjectedGaussian<double>> list;
            for (int i = 0; i < n; ++i)
            {
                ProjectedGaussian<double> p;
                p.mean2d = {8.5 + rng.uniform(-4, 4), 8.5 + rng.uniform(-4, 4)};
                double sa = rng.uniform(0.5, 4), sb = rng.uniform(0.5, 4), rho = rng.uniform(-0.8, 0.8);
                p.cov2d = {sa * sa, rho * sa * sb, sb * sb};
                double det = p.cov2d.a * p.cov2d.c - p.cov2d.b * p.cov2d.b;
                p.conic = {p.cov2d.c / det, -p.cov2d.b / det, p.cov2d.a / det};
                p.extent = {3 * sa, 3 * sb};
                p.alpha = rng.uniform(0.001, 0.999);
                p.depth = double(i);
                p.index = std::uint32_t(i);
                p.values = {rng.uniform(), rng.uniform(), rng.uniform()};
                list.push_back(p);
            }
            check_list(list, 8 + int(rng.below(3)) - 1, 8 + int(rng.below(3)) - 1);
        }

        // Real sorted lists from a rendered view
        Scene scene = box_scene();
        InitOptions io;
        io.initial_alpha = 0.3;
        BasicModel<double> model = init_model(scene, 4000, 400, 7, io).cast<double>();
        PinholeCamera cam = forward_camera(sample_poses(scene, 1, 0.2, 9)[0], kPi / 2.0, 64);
        auto view = rasterize(model, cam);
        for (int trial = 0; trial < 500; ++trial)
        {
            int row = int(rng.below(64)), col = int(rng.below(64));
            int tile = (row / 16) * view.bins.tiles_x + col / 16;
            std::vector<ProjectedGaussian<double>> list;
            for (auto e : view.bins.tile(tile))
                list.push_back(view.projected[e]);
            check_list(list, row, col);
        }

        bool ok = worst_sum <= 1e-9 && monotone && bounded && worst_occl < 1e-3 && worst_exit <= 1e-3;
        return {ok, fmt("%zu pixels: |sum w - (1 - T)| max %.1e (limit 1e-9), weights and T in [0,1]: %s, monotone T: "
                        "%s, occluded/unoccluded max %.1e (limit 1e-3), early-exit deviation max %.1e (limit 1e-3)",
                        pixels, worst_sum, bounded ? "yes" : "no", monotone ? "yes" : "no", worst_occl, worst_exit)};
    }

    // ----------------------------------------------------------------------------------------
    // 7: stage-2 freeze

    Outcome stage_freeze()
    {
        Scene scene = box_scene();
        RRFModel model = init_model(scene, 1000, 0, 77);
        RRFModel before = model;
        std::vector<SpectrumSample> spectra;
        for (const auto &pose : sample_poses(scene, 8, 0.2, 78))
            spectra.push_back({pose, splat_oracle_spectrum(trace_paths(scene, pose.position, 1), pose, 32, 64,
                                                           scene.g_ref, scene.tau_max)});
        TrainConfig config;
        config.stage2_iterations = 200;
        train_stage2(model, spectra, config);
        std::size_t geometry_changed = 0, radio_changed = 0;
        for (std::size_t i = 0; i < model.size(); ++i)
        {
            const auto &a = model.gaussians[i], &b = before.gaussians[i];
            bool same = std::memcmp(&a.position, &b.position, sizeof a.position) == 0 &&
                        std::memcmp(&a.log_scale, &b.log_scale, sizeof a.log_scale) == 0 &&
                        std::memcmp(&a.rotation, &b.rotation, sizeof a.rotation) == 0 &&
                        std::memcmp(&a.sh[0], &b.sh[0], sizeof(float) * kMaxShCoeffs) == 0;
            geometry_changed += same ? 0 : 1;
            radio_changed += std::memcmp(&a.sh[kMaxShCoeffs], &b.sh[kMaxShCoeffs], sizeof(float) * 2 * kMaxShCoeffs) ||
                                     a.opacity_logit != b.opacity_logit
                                 ? 1
                                 : 0;
        }
        return {model.size() == before.size() && geometry_changed == 0 && radio_changed > 0,
                fmt("1000 primitives, 200 stage-2 iterations: %zu with changed geometry or visual SH (must be 0), "
                    "%zu with updated radio parameters",
                    geometry_changed, radio_changed)};
    }

    // ----------------------------------------------------------------------------------------
    // 8: determinism of the command-line pipeline

    int run_cli(const std::string &args, const fs::path &log)
    {
        std::string cmd = std::string(RRF_CLI_PATH) + " " + args + " > '" + log.string() + "' 2>&1";
        return std::system(cmd.c_str());
    }

    std::string slurp(const fs::path &p)
    {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    Outcome determinism()
    {
        fs::path dir = work_dir() / "determinism";
        fs::remove_all(dir);
        fs::create_directories(dir);
        {
            TrainConfig c;
            c.stage1_phases = {{0.25, 100}, {0.5, 100}, {1.0, 200}};
            c.stage2_iterations = 300;
            c.densify.start = 100;
            c.densify.interval = 100;
            c.deterministic = true;
            c.seed = 31;
            save_train_config(c, (dir / "config.json").string());
        }
        if (run_cli("gen-scene --out '" + (dir / "scene.json").string() + "'", dir / "cli.log") != 0)
            return {false, "gen-scene failed"};
        std::string model_bytes[2];
        for (int run = 0; run < 2; ++run)
        {
            fs::path ds = dir / ("ds" + std::to_string(run));
            fs::path model = dir / ("model" + std::to_string(run) + ".rrfg");
            std::string threads = run == 0 ? "1" : "4";
            if (run_cli("--threads " + threads + " gen-dataset --scene '" + (dir / "scene.json").string() +
                            "' --out '" + ds.string() + "' --n-train 40 --n-test 5 --resolution 64 --seed 12",
                        dir / "cli.log") != 0)
                return {false, "gen-dataset failed: " + slurp(dir / "cli.log")};
            if (run_cli("--threads " + threads + " train --stage both --dataset '" + (ds / "manifest.json").string() +
                            "' --config '" + (dir / "config.json").string() + "' --out '" + model.string() + "'",
                        dir / "cli.log") != 0)
                return {false, "train failed: " + slurp(dir / "cli.log")};
            model_bytes[run] = slurp(model);
        }
        bool datasets_equal = true;
        for (const auto &e : fs::recursive_directory_iterator(dir / "ds0"))
            if (e.is_regular_file())
                datasets_equal = datasets_equal &&
                                 slurp(e.path()) == slurp(dir / "ds1" / fs::relative(e.path(), dir / "ds0"));
        bool models_equal = !model_bytes[0].empty() && model_bytes[0] == model_bytes[1];
        return {datasets_equal && models_equal,
                fmt("two CLI runs (1 vs 4 worker threads): datasets %s, model files %s (%zu bytes)",
                    datasets_equal ? "identical" : "DIFFER", models_equal ? "bit-identical" : "DIFFER",
                    model_bytes[0].size())};
    }

} // namespace

int main(int argc, char **argv)
{
    const std::map<int, std::pair<const char *, std::function<Outcome()>>> criteria = {
        {1, {"gradient oracle", gradient_oracle}},
        {2, {"oracle round-trip (rendering)", rendering_round_trip}},
        {3, {"oracle round-trip (extraction)", extraction_round_trip}},
        {4, {"end-to-end reconstruction", end_to_end_reconstruction}},
        {5, {"rendering latency", render_latency}},
        {6, {"compositing invariants", compositing_invariants}},
        {7, {"stage-freeze contract", stage_freeze}},
        {8, {"determinism", determinism}},
        {9, {"beamforming sanity", beamforming_sanity}},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.insert(std::atoi(argv[i]));
    if (selected.empty())
        for (const auto &c : criteria)
            selected.insert(c.first);

    int failed = 0;
    for (int id : selected)
    {
        auto it = criteria.find(id);
        if (it == criteria.end())
        {
            std::printf("unknown criterion %d\n", id);
            return 2;
        }
        auto t0 = Clock::now();
        Outcome o;
        try
        {
            o = it->second.second();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] criterion %d (%s): %s [%.0f s]\n", o.pass ? "PASS" : "FAIL", id, it->second.first,
                    o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", int(selected.size()) - failed, selected.size());
    return failed == 0 ? 0 : 1;
}
