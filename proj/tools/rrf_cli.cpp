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

// Command-line front end: scene and dataset generation, training, rendering and queries.

#include "rrf/csi.hpp"
#include "rrf/dataset.hpp"
#include "rrf/gradcheck.hpp"
#include "rrf/parallel.hpp"
#include "rrf/rasterizer.hpp"
#include "rrf/trainer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace rrf;

namespace
{
    // Failures inside a command; reported as a single line with exit code 1
    struct CommandError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    // Files are written next to their destination and renamed once complete, so a
    // failing command never leaves partial output behind.
    class StagedOutputs
    {
    public:
        std::string stage(const std::string &path)
        {
            if (path.empty())
                return {};
            fs::path p(path);
            if (p.has_parent_path() && !fs::is_directory(p.parent_path()))
                throw CommandError("output directory '" + p.parent_path().string() + "' does not exist");
            std::string tmp = path + ".partial";
            pending_.push_back({tmp, path});
            return tmp;
        }

        void commit()
        {
            for (const auto &[tmp, dst] : pending_)
                fs::rename(tmp, dst);
            pending_.clear();
        }

        ~StagedOutputs()
        {
            std::error_code ec;
            for (const auto &entry : pending_)
                fs::remove_all(entry.first, ec);
        }

    private:
        std::vector<std::pair<std::string, std::string>> pending_;
    };

    void write_text(const std::string &path, const std::string &text)
    {
        std::ofstream out(path);
        out << text << "\n";
        if (!out)
            throw CommandError("cannot write '" + path + "'");
    }

    std::vector<double> parse_numbers(const std::string &text)
    {
        std::vector<double> out;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ','))
        {
            std::size_t used = 0;
            double v = 0.0;
            try
            {
                v = std::stod(item, &used);
            }
            catch (const std::exception &)
            {
                used = 0;
            }
            if (used == 0 || used != item.size() || !std::isfinite(v))
                throw CommandError("'" + text + "' is not a comma-separated list of numbers");
            out.push_back(v);
        }
        return out;
    }

    Vec3<double> parse_vec3(const std::string &text)
    {
        auto v = parse_numbers(text);
        if (v.size() != 3)
            throw CommandError("expected x,y,z but got '" + text + "'");
        return {v[0], v[1], v[2]};
    }

    // "x,y,z" or "x,y,z,qw,qx,qy,qz"; a yaw angle in degrees is applied about world +z afterwards
    RxPose parse_pose(const std::string &text, double yaw_deg)
    {
        auto v = parse_numbers(text);
        if (v.size() != 3 && v.size() != 7)
            throw CommandError("pose must be x,y,z or x,y,z,qw,qx,qy,qz");
        RxPose pose;
        pose.position = {v[0], v[1], v[2]};
        if (v.size() == 7)
        {
            Quat<double> q(v[3], v[4], v[5], v[6]);
            if (!(q.norm() > 1e-12))
                throw CommandError("pose quaternion must be non-zero");
            pose.orientation = q.normalized();
        }
        if (yaw_deg != 0.0)
        {
            double h = 0.5 * yaw_deg * kPi / 180.0;
            pose.orientation = (Quat<double>(std::cos(h), 0.0, 0.0, std::sin(h)) * pose.orientation).normalized();
        }
        return pose;
    }

    int channel_index(const std::string &name)
    {
        for (int c = 0; c < kNumChannels; ++c)
            if (name == kChannelNames[std::size_t(c)] || (name == "tof" && c == kTof))
                return c;
        throw CommandError("unknown channel '" + name + "' (visual, gain, tof)");
    }

    void write_png_auto(const RadioSpatialSpectrum &s, int channel, const std::string &path)
    {
        double hi = 0.0;
        for (int r = 0; r < s.height; ++r)
            for (int c = 0; c < s.width; ++c)
                hi = std::max(hi, double(s.at(channel, r, c)));
        if (channel == kVisual || channel == kTof)
            hi = 1.0;
        write_channel_png(s, channel, 0.0, hi > 0.0 ? hi : 1.0, path);
    }

    RRFModel load_model_checked(const std::string &path)
    {
        if (!fs::exists(path))
            throw CommandError("model file '" + path + "' does not exist");
        return read_model(path);
    }

    double percentile(std::vector<double> v, double q)
    {
        std::sort(v.begin(), v.end());
        double pos = q * double(v.size() - 1);
        std::size_t lo = std::size_t(std::floor(pos));
        std::size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
    }

    // ----------------------------------------------------------------------------------------

    struct GenSceneArgs
    {
        std::string kind = "box";
        std::string size = "5,4,3";
        std::string tx = "1.3,1.1,2.1";
        double freq = 28e9;
        std::string reflection;
        std::string out;
    };

    void run_gen_scene(const GenSceneArgs &a)
    {
        Vec3<double> size = parse_vec3(a.size), tx = parse_vec3(a.tx);
        Scene scene;
        if (a.kind == "box")
        {
            if (a.reflection.empty())
                scene = make_box_scene(size, tx, a.freq);
            else
            {
                auto r = parse_numbers(a.reflection);
                if (r.size() != 6)
                    throw CommandError("--reflection needs six coefficients");
                scene = make_box_scene(size, tx, a.freq, {r[0], r[1], r[2], r[3], r[4], r[5]});
            }
        }
        else if (a.kind == "corridor")
            scene = make_corridor_scene(size.x, size.y, size.z, tx, a.freq);
        else
            throw CommandError("unknown scene kind '" + a.kind + "'");
        scene.validate();
        StagedOutputs outputs;
        save_scene(scene, outputs.stage(a.out));
        outputs.commit();
    }

    struct GenDatasetArgs
    {
        std::string scene;
        std::string out;
        DatasetOptions options;
    };

    void run_gen_dataset(const GenDatasetArgs &a)
    {
        Scene scene = load_scene(a.scene);
        if (fs::exists(a.out) && !fs::is_empty(a.out))
            throw CommandError("output directory '" + a.out + "' already exists and is not empty");
        fs::path target = fs::absolute(a.out).lexically_normal();
        if (target.filename().empty())
            target = target.parent_path();
        fs::path staging = target.string() + ".partial";
        std::error_code ec;
        fs::remove_all(staging, ec);
        try
        {
            gen_dataset(scene, staging.string(), a.options);
        }
        catch (...)
        {
            fs::remove_all(staging, ec);
            throw;
        }
        if (fs::exists(target))
            fs::remove(target);
        fs::rename(staging, target);
        std::printf("%s\n", (target / "manifest.json").string().c_str());
    }

    struct TrainArgs
    {
        std::string dataset;
        std::string stage = "both";
        std::string config;
        std::string init;
        std::string out;
        std::string log;
        std::string dump_config;
        long long seed = -1;
        bool no_wall_time = false;
    };

    void run_train(const TrainArgs &a)
    {
        if (a.stage != "1" && a.stage != "2" && a.stage != "both")
            throw CommandError("--stage must be 1, 2 or both");
        TrainConfig config = a.config.empty() ? TrainConfig{} : load_train_config(a.config);
        if (a.seed >= 0)
            config.seed = std::uint64_t(a.seed);
        config.validate();
        Dataset ds = Dataset::load(a.dataset);
        if (config.scene_diagonal <= 0.0)
            config.scene_diagonal = ds.scene.aabb.diagonal();

        RRFModel model;
        if (!a.init.empty())
            model = load_model_checked(a.init);
        else if (a.stage == "2")
            throw CommandError("--stage 2 requires --init with a stage-1 model");
        else
            model = initial_model(ds.scene, config);

        StagedOutputs outputs;
        std::string model_tmp = outputs.stage(a.out);
        std::string log_tmp = outputs.stage(a.log);
        std::string config_tmp = outputs.stage(a.dump_config);
        std::ofstream log_file;
        TrainLog log;
        log.wall_time = !a.no_wall_time;
        if (!log_tmp.empty())
        {
            log_file.open(log_tmp);
            if (!log_file)
                throw CommandError("cannot write log '" + a.log + "'");
            log.out = &log_file;
        }

        auto t0 = std::chrono::steady_clock::now();
        if (a.stage != "2")
            train_stage1(model, ds.visual_samples(Split::train), config, log);
        if (a.stage != "1")
            train_stage2(model, ds.spectrum_samples(Split::train), config, log);
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        write_model(model, model_tmp);
        if (!config_tmp.empty())
            save_train_config(config, config_tmp);
        log_file.close();
        outputs.commit();
        std::fprintf(stderr, "trained %zu primitives in %.1f s\n", model.size(), seconds);
    }

    struct RenderArgs
    {
        std::string model;
        std::string pose;
        double yaw = 0.0;
        bool panorama = false;
        bool pinhole = false;
        int height = 128;
        int resolution = 128;
        double fov_deg = 90.0;
        std::string out;
        std::string png;
        std::string channel = "gain";
    };

    void run_render(const RenderArgs &a)
    {
        if (a.panorama && a.pinhole)
            throw CommandError("--panorama and --pinhole are exclusive");
        if (a.out.empty() && a.png.empty())
            throw CommandError("nothing to write: give --out and/or --png");
        RxPose pose = parse_pose(a.pose, a.yaw);
        int channel = channel_index(a.channel);
        RRFModel model = load_model_checked(a.model);
        RadioSpatialSpectrum s;
        if (a.pinhole)
        {
            PinholeCamera cam = forward_camera(pose, a.fov_deg * kPi / 180.0, a.resolution);
            cam.validate();
            s = render_view(model, cam);
        }
        else
        {
            if (a.height < 2)
                throw CommandError("--height must be at least 2");
            s = render_panorama(model, pose, a.height);
        }
        StagedOutputs outputs;
        if (!a.out.empty())
            write_spectrum(s, outputs.stage(a.out));
        if (!a.png.empty())
            write_png_auto(s, channel, outputs.stage(a.png));
        outputs.commit();
    }

    struct QueryArgs
    {
        std::string model;
        std::string pose;
        double yaw = 0.0;
        int height = 128;
        ExtractOptions extract;
        std::string out;
    };

    void run_query(QueryArgs a)
    {
        RxPose pose = parse_pose(a.pose, a.yaw);
        RRFModel model = load_model_checked(a.model);
        a.extract.g_ref = model.meta.g_ref;
        a.extract.tau_max = model.meta.tau_max;
        RadioSpatialSpectrum s = render_panorama(model, pose, a.height);
        std::string text = mpcs_json(extract_mpcs(s, a.extract));
        if (a.out.empty())
        {
            std::printf("%s\n", text.c_str());
            return;
        }
        StagedOutputs outputs;
        write_text(outputs.stage(a.out), text);
        outputs.commit();
    }

    struct EvalArgs
    {
        std::string model;
        std::string dataset;
        std::string split = "test";
        bool timing = false;
        std::string out;
    };

    void run_eval(const EvalArgs &a)
    {
        if (a.split != "train" && a.split != "test")
            throw CommandError("--split must be train or test");
        RRFModel model = load_model_checked(a.model);
        Dataset ds = Dataset::load(a.dataset);
        EvalReport report = evaluate(model, ds, a.split == "train" ? Split::train : Split::test, a.timing);
        std::string text = eval_report_json(report);
        if (a.out.empty())
        {
            std::printf("%s\n", text.c_str());
            return;
        }
        StagedOutputs outputs;
        write_text(outputs.stage(a.out), text);
        outputs.commit();
    }

    struct BeamformArgs
    {
        std::string model;
        std::string pose;
        double yaw = 0.0;
        std::string kind = "ula";
        int count_u = 16;
        int count_v = 1;
        double spacing = 0.5;
        std::string boresight = "1,0,0";
        std::string scene;
        BeamformOptions options;
        std::string out;
    };

    void run_beamform(const BeamformArgs &a)
    {
        RxPose pose = parse_pose(a.pose, a.yaw);
        ArrayGeometry arr;
        if (a.kind == "ula")
            arr.kind = ArrayKind::ula;
        else if (a.kind == "upa")
            arr.kind = ArrayKind::upa;
        else
            throw CommandError("--array must be ula or upa");
        arr.count_u = a.count_u;
        arr.count_v = a.count_v;
        arr.spacing = a.spacing;
        arr.boresight = parse_vec3(a.boresight);
        arr.validate();
        RRFModel model = load_model_checked(a.model);
        std::optional<Scene> scene;
        if (!a.scene.empty())
            scene = load_scene(a.scene);
        BeamformReport report = beamform_report(model, pose, arr, a.options, scene ? &*scene : nullptr);
        std::string text = beamform_report_json(report);
        if (a.out.empty())
        {
            std::printf("%s\n", text.c_str());
            return;
        }
        StagedOutputs outputs;
        write_text(outputs.stage(a.out), text);
        outputs.commit();
    }

    struct RisArgs
    {
        std::string model;
        std::string pose;
        double yaw = 0.0;
        int height = 128;
        std::string out;
        std::string png;
    };

    void run_ris_query(const RisArgs &a)
    {
        if (a.out.empty() && a.png.empty())
            throw CommandError("nothing to write: give --out and/or --png");
        if (a.height < 2)
            throw CommandError("--height must be at least 2");
        RxPose pose = parse_pose(a.pose, a.yaw);
        RRFModel model = load_model_checked(a.model);
        RadioSpatialSpectrum s = ris_incident_query(model, pose, a.height);
        StagedOutputs outputs;
        if (!a.out.empty())
            write_spectrum(s, outputs.stage(a.out));
        if (!a.png.empty())
            write_png_auto(s, kGain, outputs.stage(a.png));
        outputs.commit();
    }

    struct GradcheckArgs
    {
        int primitives = 50;
        long long seed = 0;
        int models = 1;
        double threshold = 1e-3;
        GradcheckOptions options;
        bool single = false;
    };

    int run_gradcheck(GradcheckArgs a)
    {
        if (a.primitives < 1 || a.models < 1)
            throw CommandError("--n and --models must be positive");
        a.options.primitives = a.primitives;
        a.options.single_precision = a.single;
        std::array<double, kNumParamGroups> group_max{};
        double worst = 0.0;
        std::size_t checked = 0, skipped = 0;
        auto t0 = std::chrono::steady_clock::now();
        for (int m = 0; m < a.models; ++m)
        {
            GradcheckReport r = gradcheck(std::uint64_t(a.seed) + std::uint64_t(m), a.options);
            for (int g = 0; g < kNumParamGroups; ++g)
                group_max[std::size_t(g)] = std::max(group_max[std::size_t(g)], r.group_max[std::size_t(g)]);
            worst = std::max(worst, r.max_rel_error);
            checked += r.checked;
            skipped += r.skipped;
        }
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (int g = 0; g < kNumParamGroups; ++g)
            std::printf("%-14s max rel error %.3e\n", kParamGroupNames[std::size_t(g)], group_max[std::size_t(g)]);
        std::printf("checked %zu skipped %zu models %d time %.1f s\n", checked, skipped, a.models, seconds);
        std::printf("max rel error %.3e\n", worst);
        if (!(worst <= a.threshold))
        {
            std::fprintf(stderr, "error: max relative error %.3e exceeds %.1e\n", worst, a.threshold);
            return 1;
        }
        return 0;
    }

    struct BenchArgs
    {
        std::string model;
        int primitives = 50000;
        double alpha = 0.6;
        int resolution = 128;
        int warmup = 10;
        int runs = 100;
        long long seed = 0;
        std::string pose;
        std::string out;
    };

    // Surface-hugging primitives on the default box scene, viewed from its center
    void run_bench(const BenchArgs &a)
    {
        if (a.runs < 1 || a.warmup < 0 || a.resolution < 1)
            throw CommandError("--runs and --resolution must be positive");
        Scene scene = make_box_scene({5.0, 4.0, 3.0}, {1.3, 1.1, 2.1});
        RRFModel model;
        if (!a.model.empty())
            model = load_model_checked(a.model);
        else
        {
            if (a.primitives < 1 || !(a.alpha > 0.0 && a.alpha < 1.0))
                throw CommandError("--primitives must be positive and --alpha in (0, 1)");
            InitOptions io;
            io.initial_alpha = a.alpha;
            model = init_model(scene, a.primitives, 0, std::uint64_t(a.seed), io);
        }
        RxPose pose;
        if (a.pose.empty())
            pose.position = 0.5 * (scene.aabb.min + scene.aabb.max);
        else
            pose = parse_pose(a.pose, 0.0);
        PinholeCamera cam = forward_camera(pose, kPi / 2.0, a.resolution);

        for (int i = 0; i < a.warmup; ++i)
            (void)rasterize(model, cam);
        std::vector<double> ms;
        ms.reserve(std::size_t(a.runs));
        for (int i = 0; i < a.runs; ++i)
        {
            auto t0 = std::chrono::steady_clock::now();
            auto r = rasterize(model, cam);
            ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
            if (r.image.data.empty())
                throw CommandError("empty render");
        }
        double mean = 0.0;
        for (double v : ms)
            mean += v;
        mean /= double(ms.size());
        std::ostringstream os;
        os << "{\n  \"primitives\": " << model.size() << ",\n  \"resolution\": " << a.resolution
           << ",\n  \"threads\": " << thread_count() << ",\n  \"runs\": " << a.runs
           << ",\n  \"median_ms\": " << percentile(ms, 0.5) << ",\n  \"p95_ms\": " << percentile(ms, 0.95)
           << ",\n  \"mean_ms\": " << mean << ",\n  \"min_ms\": " << *std::min_element(ms.begin(), ms.end())
           << "\n}";
        if (a.out.empty())
        {
            std::printf("%s\n", os.str().c_str());
            return;
        }
        StagedOutputs outputs;
        write_text(outputs.stage(a.out), os.str());
        outputs.commit();
    }

    template <typename Args>
    void add_pose_options(CLI::App *cmd, Args &a, bool required = true)
    {
        auto *opt = cmd->add_option("--pose", a.pose, "Receiver pose x,y,z or x,y,z,qw,qx,qy,qz (world frame)");
        if (required)
            opt->required();
        cmd->add_option("--yaw", a.yaw, "Extra rotation about world +z [deg]");
    }

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"rrf: radio radiance fields with differentiable Gaussian splatting"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: RRF_NUM_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);

    GenSceneArgs scene_args;
    auto *gen_scene = app.add_subcommand("gen-scene", "Write a parametric box or corridor scene as JSON");
    gen_scene->add_option("--kind", scene_args.kind, "box or corridor")->capture_default_str();
    gen_scene->add_option("--size", scene_args.size, "Box size or corridor length,width,height [m]")
        ->capture_default_str();
    gen_scene->add_option("--tx", scene_args.tx, "Transmitter position x,y,z [m]")->capture_default_str();
    gen_scene->add_option("--freq", scene_args.freq, "Carrier frequency [Hz]")->capture_default_str();
    gen_scene->add_option("--reflection", scene_args.reflection,
                          "Six amplitude reflection coefficients (-x,+x,-y,+y,-z,+z), box only");
    gen_scene->add_option("--out", scene_args.out, "Output scene JSON")->required();

    GenDatasetArgs ds_args;
    auto *gen_ds = app.add_subcommand("gen-dataset", "Sample poses and write oracle spectra and visual views");
    gen_ds->add_option("--scene", ds_args.scene, "Scene JSON")->required()->check(CLI::ExistingFile);
    gen_ds->add_option("--out", ds_args.out, "Output directory (must be new or empty)")->required();
    gen_ds->add_option("--n-train", ds_args.options.n_train, "Training poses")->capture_default_str();
    gen_ds->add_option("--n-test", ds_args.options.n_test, "Test poses")->capture_default_str();
    gen_ds->add_option("--resolution", ds_args.options.resolution, "Panorama height H (width 2H)")
        ->capture_default_str();
    gen_ds->add_option("--visual-resolution", ds_args.options.visual_resolution, "Pinhole view size")
        ->capture_default_str();
    gen_ds->add_option("--max-order", ds_args.options.max_order, "Maximum reflection order")->capture_default_str();
    gen_ds->add_option("--margin", ds_args.options.margin, "Pose clearance from facets and transmitter [m]")
        ->capture_default_str();
    gen_ds->add_option("--seed", ds_args.options.seed, "Pose sampling seed")->capture_default_str();

    TrainArgs train_args;
    auto *train = app.add_subcommand("train", "Two-stage training on a dataset");
    train->add_option("--dataset", train_args.dataset, "Dataset manifest.json")->required()->check(CLI::ExistingFile);
    train->add_option("--stage", train_args.stage, "1, 2 or both")->capture_default_str();
    train->add_option("--config", train_args.config, "Training config JSON (defaults otherwise)")
        ->check(CLI::ExistingFile);
    train->add_option("--init", train_args.init, "Start from this model instead of a fresh initialization");
    train->add_option("--out", train_args.out, "Output model (.rrfg)")->required();
    train->add_option("--log", train_args.log, "JSON-lines training log");
    train->add_option("--dump-config", train_args.dump_config, "Write the effective config JSON");
    train->add_option("--seed", train_args.seed, "Override the config seed");
    train->add_flag("--no-wall-time", train_args.no_wall_time, "Omit timing fields from the log");

    RenderArgs render_args;
    auto *render = app.add_subcommand("render", "Render a panorama or pinhole view");
    render->add_option("--model", render_args.model, "Model (.rrfg)")->required();
    add_pose_options(render, render_args);
    render->add_flag("--panorama", render_args.panorama, "Equirectangular H x 2H panorama (default)");
    render->add_flag("--pinhole", render_args.pinhole, "Forward-looking pinhole view");
    render->add_option("--height", render_args.height, "Panorama height")->capture_default_str();
    render->add_option("--resolution", render_args.resolution, "Pinhole size")->capture_default_str();
    render->add_option("--fov", render_args.fov_deg, "Pinhole field of view [deg]")->capture_default_str();
    render->add_option("--out", render_args.out, "Output spectrum (.rrfs)");
    render->add_option("--png", render_args.png, "Output PNG of one channel");
    render->add_option("--channel", render_args.channel, "PNG channel: visual, gain or tof")->capture_default_str();

    QueryArgs query_args;
    auto *query = app.add_subcommand("query", "Top-k multipath components at a pose as JSON");
    query->add_option("--model", query_args.model, "Model (.rrfg)")->required();
    add_pose_options(query, query_args);
    query->add_option("--k", query_args.extract.k, "Maximum components")->capture_default_str();
    query->add_option("--height", query_args.height, "Panorama height")->capture_default_str();
    query->add_option("--min-gain", query_args.extract.min_gain, "Gain channel threshold")->capture_default_str();
    query->add_option("--nms-radius", query_args.extract.nms_radius, "Suppression radius [pixels]")
        ->capture_default_str();
    query->add_option("--out", query_args.out, "Output JSON (stdout otherwise)");

    EvalArgs eval_args;
    auto *eval = app.add_subcommand("eval", "Metrics of a model on a dataset split");
    eval->add_option("--model", eval_args.model, "Model (.rrfg)")->required();
    eval->add_option("--dataset", eval_args.dataset, "Dataset manifest.json")->required()->check(CLI::ExistingFile);
    eval->add_option("--split", eval_args.split, "train or test")->capture_default_str();
    eval->add_flag("--timing", eval_args.timing, "Include render latency");
    eval->add_option("--out", eval_args.out, "Output JSON (stdout otherwise)");

    BeamformArgs bf_args;
    auto *beamform = app.add_subcommand("beamform", "Matched beam toward the strongest rendered component");
    beamform->add_option("--model", bf_args.model, "Model (.rrfg)")->required();
    add_pose_options(beamform, bf_args);
    beamform->add_option("--array", bf_args.kind, "ula or upa")->capture_default_str();
    beamform->add_option("--elements", bf_args.count_u, "Elements along the first axis")->capture_default_str();
    beamform->add_option("--elements-v", bf_args.count_v, "Elements along the second axis (upa)")
        ->capture_default_str();
    beamform->add_option("--spacing", bf_args.spacing, "Element spacing [wavelengths]")->capture_default_str();
    beamform->add_option("--boresight", bf_args.boresight, "Array boresight x,y,z (world)")->capture_default_str();
    beamform->add_option("--k", bf_args.options.k, "Components to report")->capture_default_str();
    beamform->add_option("--height", bf_args.options.height, "Panorama height")->capture_default_str();
    beamform->add_option("--scene", bf_args.scene, "Scene JSON for an oracle comparison")->check(CLI::ExistingFile);
    beamform->add_option("--out", bf_args.out, "Output JSON (stdout otherwise)");

    RisArgs ris_args;
    auto *ris = app.add_subcommand("ris-query", "Incident spectrum at a reconfigurable surface pose");
    ris->add_option("--model", ris_args.model, "Model (.rrfg)")->required();
    add_pose_options(ris, ris_args);
    ris->add_option("--height", ris_args.height, "Panorama height")->capture_default_str();
    ris->add_option("--out", ris_args.out, "Output spectrum (.rrfs)");
    ris->add_option("--png", ris_args.png, "Output PNG of the gain channel");

    GradcheckArgs gc_args;
    auto *gc = app.add_subcommand("gradcheck", "Analytic gradients against central finite differences");
    gc->add_option("--n", gc_args.primitives, "Primitives per random model")->capture_default_str();
    gc->add_option("--seed", gc_args.seed, "First model seed")->capture_default_str();
    gc->add_option("--models", gc_args.models, "Number of random models (seeds seed, seed+1, ...)")
        ->capture_default_str();
    gc->add_option("--resolution", gc_args.options.resolution, "View size")->capture_default_str();
    gc->add_option("--threshold", gc_args.threshold, "Maximum accepted relative error")->capture_default_str();
    gc->add_option("--step", gc_args.options.step, "Finite-difference step")->capture_default_str();
    gc->add_flag("--float", gc_args.single, "Analytic gradient in single precision");

    BenchArgs bench_args;
    auto *bench = app.add_subcommand("bench", "Pinhole render latency distribution");
    bench->add_option("--model", bench_args.model, "Model (.rrfg); a synthetic surface model otherwise");
    bench->add_option("--primitives", bench_args.primitives, "Synthetic model size")->capture_default_str();
    bench->add_option("--alpha", bench_args.alpha, "Synthetic primitive opacity")->capture_default_str();
    bench->add_option("--resolution", bench_args.resolution, "View size")->capture_default_str();
    bench->add_option("--warmup", bench_args.warmup, "Untimed renders")->capture_default_str();
    bench->add_option("--runs", bench_args.runs, "Timed renders")->capture_default_str();
    bench->add_option("--seed", bench_args.seed, "Synthetic model seed")->capture_default_str();
    bench->add_option("--pose", bench_args.pose, "Camera pose (default: box center looking +x)");
    bench->add_option("--out", bench_args.out, "Output JSON (stdout otherwise)");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (threads > 0)
            set_thread_count(threads);
        if (gen_scene->parsed())
            run_gen_scene(scene_args);
        else if (gen_ds->parsed())
            run_gen_dataset(ds_args);
        else if (train->parsed())
            run_train(train_args);
        else if (render->parsed())
            run_render(render_args);
        else if (query->parsed())
            run_query(query_args);
        else if (eval->parsed())
            run_eval(eval_args);
        else if (beamform->parsed())
            run_beamform(bf_args);
        else if (ris->parsed())
            run_ris_query(ris_args);
        else if (gc->parsed())
            return run_gradcheck(gc_args);
        else if (bench->parsed())
            run_bench(bench_args);
    }
    catch (const std::exception &e)
    {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        std::fprintf(stderr, "error: %s\n", msg.c_str());
        return 1;
    }
    return 0;
}
