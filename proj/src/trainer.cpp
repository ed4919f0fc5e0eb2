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

#include "rrf/trainer.hpp"
#include "rrf/random.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rrf
{
    using json = nlohmann::json;

    // --------------------------------------------------------------------------------------------
    // Optimizer

    namespace
    {
        struct AdamStep
        {
            double beta1, beta2, eps, corr1, corr2;

            void apply(float &param, float grad, float &m, float &v, double lr) const
            {
                double mm = beta1 * double(m) + (1.0 - beta1) * double(grad);
                double vv = beta2 * double(v) + (1.0 - beta2) * double(grad) * double(grad);
                m = float(mm);
                v = float(vv);
                double update = lr * (mm / corr1) / (std::sqrt(vv / corr2) + eps);
                param = float(double(param) - update);
            }
        };
    } // namespace

    void opt_step(RRFModel &model, const Gradients<float> &grads, OptimState &state, const LearningRates &lr,
                  const ParamMask &mask, double position_scale, const AdamSettings &adam)
    {
        if (grads.size() != model.size() || state.size() != model.size())
            throw std::invalid_argument("optimizer state, gradients and model sizes differ");
        ++state.step;
        const double t = double(state.step);
        const AdamStep step{adam.beta1, adam.beta2, adam.epsilon, 1.0 - std::pow(adam.beta1, t),
                            1.0 - std::pow(adam.beta2, t)};
        const int nk = model.coeffs_per_channel();
        const double lr_pos = lr.position * position_scale;

        for (std::size_t i = 0; i < model.size(); ++i)
        {
            auto &p = model.gaussians[i];
            const auto &g = grads.params[i];
            auto &m = state.first_moment[i];
            auto &v = state.second_moment[i];
            if (mask.position)
                for (int k = 0; k < 3; ++k)
                    step.apply(p.position[k], g.position[k], m.position[k], v.position[k], lr_pos);
            if (mask.log_scale)
                for (int k = 0; k < 3; ++k)
                    step.apply(p.log_scale[k], g.log_scale[k], m.log_scale[k], v.log_scale[k], lr.log_scale);
            if (mask.rotation)
            {
                for (int k = 0; k < 4; ++k)
                    step.apply(p.rotation[k], g.rotation[k], m.rotation[k], v.rotation[k], lr.rotation);
                p.rotation = p.rotation.normalized();
            }
            if (mask.opacity)
                step.apply(p.opacity_logit, g.opacity_logit, m.opacity_logit, v.opacity_logit, lr.opacity);
            for (int ch = 0; ch < kNumChannels; ++ch)
                if (mask.sh[std::size_t(ch)])
                    for (int k = 0; k < nk; ++k)
                        step.apply(p.coeff(ch, k), g.coeff(ch, k), m.coeff(ch, k), v.coeff(ch, k),
                                   k == 0 ? lr.sh[std::size_t(ch)] : lr.sh[std::size_t(ch)] * lr.sh_rest_scale);
        }
    }

    // --------------------------------------------------------------------------------------------
    // Densification

    std::array<GaussianPrimitive<float>, 2> split_primitive(const GaussianPrimitive<float> &g)
    {
        constexpr double kOffset = 0.78, kShrink = 1.6;
        int axis = 0;
        for (int k = 1; k < 3; ++k)
            if (g.log_scale[k] > g.log_scale[axis])
                axis = k;
        const Mat3<double> r = Quat<double>(g.rotation).normalized().to_matrix();
        const double sigma = std::exp(double(g.log_scale[axis]));
        const Vec3<double> dir{r.m[0][axis], r.m[1][axis], r.m[2][axis]};
        const Vec3<double> offset = dir * (kOffset * sigma);

        // Each child contributes alpha_c * exp(-(0.78 * 1.6)^2 / 2) at the parent center
        const double reach = std::exp(-0.5 * (kOffset * kShrink) * (kOffset * kShrink));
        const double alpha = double(g.alpha());
        const double child_alpha = std::clamp((1.0 - std::sqrt(1.0 - alpha)) / reach, 1e-4, 0.99);

        std::array<GaussianPrimitive<float>, 2> out{g, g};
        for (int s = 0; s < 2; ++s)
        {
            auto &c = out[std::size_t(s)];
            Vec3<double> pos = Vec3<double>(g.position) + (s == 0 ? offset : -offset);
            c.position = Vec3<float>(pos);
            for (int k = 0; k < 3; ++k)
                c.log_scale[k] = float(double(g.log_scale[k]) - std::log(kShrink));
            c.opacity_logit = float(logit(child_alpha));
        }
        return out;
    }

    DensifyResult densify_and_prune(RRFModel &model, const Gradients<float> &stats, OptimState &state,
                                    const DensifySettings &settings, double scene_diagonal)
    {
        const std::size_t n = model.size();
        if (stats.size() != n || state.size() != n)
            throw std::invalid_argument("densify: statistics, optimizer state and model sizes differ");

        DensifyResult result;
        std::vector<GaussianPrimitive<float>> grown;
        std::vector<std::uint32_t> origin;
        std::vector<char> fresh; // New primitives start with zero moments
        grown.reserve(n);
        std::size_t budget = settings.max_primitives > n ? settings.max_primitives - n : 0;
        const double split_scale = settings.scale_fraction * scene_diagonal;

        for (std::size_t i = 0; i < n; ++i)
        {
            const auto &g = model.gaussians[i];
            const double mean = stats.visible_views[i] > 0 ? stats.mean2d_norm_sum[i] / stats.visible_views[i] : 0.0;
            if (mean > settings.grad_threshold && budget > 0)
            {
                const double s_max = std::exp(double(std::max({g.log_scale.x, g.log_scale.y, g.log_scale.z})));
                if (s_max < split_scale)
                {
                    grown.push_back(g);
                    origin.push_back(std::uint32_t(i));
                    fresh.push_back(0);
                    grown.push_back(g);
                    origin.push_back(std::uint32_t(i));
                    fresh.push_back(1);
                    ++result.cloned;
                }
                else
                {
                    for (const auto &c : split_primitive(g))
                    {
                        grown.push_back(c);
                        origin.push_back(std::uint32_t(i));
                        fresh.push_back(1);
                    }
                    ++result.split;
                }
                --budget;
                continue;
            }
            grown.push_back(g);
            origin.push_back(std::uint32_t(i));
            fresh.push_back(0);
        }

        OptimState next(0);
        next.step = state.step;
        model.gaussians.clear();
        for (std::size_t j = 0; j < grown.size(); ++j)
        {
            if (double(grown[j].alpha()) < settings.prune_alpha)
            {
                ++result.pruned;
                continue;
            }
            model.gaussians.push_back(grown[j]);
            result.origin.push_back(origin[j]);
            if (fresh[j])
            {
                next.first_moment.push_back(zero_gradient<float>());
                next.second_moment.push_back(zero_gradient<float>());
            }
            else
            {
                next.first_moment.push_back(state.first_moment[origin[j]]);
                next.second_moment.push_back(state.second_moment[origin[j]]);
            }
        }
        state = std::move(next);
        return result;
    }

    // --------------------------------------------------------------------------------------------
    // Configuration

    void TrainConfig::validate() const
    {
        for (const auto &p : stage1_phases)
        {
            if (p.iterations < 0)
                throw std::invalid_argument("phase iterations must be non-negative");
            if (!(p.scale == 1.0 || p.scale == 0.5 || p.scale == 0.25 || p.scale == 0.125))
                throw std::invalid_argument("phase scale must be one of 1/8, 1/4, 1/2, 1");
        }
        if (stage2_iterations < 0)
            throw std::invalid_argument("stage2 iterations must be non-negative");
        if (init.surface < 0 || init.uniform < 0 || init.transmitter_seeds < 0)
            throw std::invalid_argument("init counts must be non-negative");
        if (!(init.initial_alpha > 0.0 && init.initial_alpha < 1.0))
            throw std::invalid_argument("init alpha must lie in (0, 1)");
        if (densify.interval < 0 || log_interval < 0)
            throw std::invalid_argument("intervals must be non-negative");
        if (!(lr.sh_rest_scale >= 0.0))
            throw std::invalid_argument("sh_rest_scale must be non-negative");
    }

    static json weights_json(const LossWeights &w)
    {
        return {{"visual", w.visual}, {"gain", w.gain}, {"gain_l2", w.gain_l2}, {"tof", w.tof},
                {"mask_threshold", w.mask_threshold}, {"ssim_mix", w.ssim_mix}};
    }

    static LossWeights weights_from(const json &j, LossWeights w)
    {
        w.visual = j.value("visual", w.visual);
        w.gain = j.value("gain", w.gain);
        w.gain_l2 = j.value("gain_l2", w.gain_l2);
        w.tof = j.value("tof", w.tof);
        w.mask_threshold = j.value("mask_threshold", w.mask_threshold);
        w.ssim_mix = j.value("ssim_mix", w.ssim_mix);
        return w;
    }

    std::string train_config_json(const TrainConfig &c)
    {
        json phases = json::array();
        for (const auto &p : c.stage1_phases)
            phases.push_back({{"scale", p.scale}, {"iterations", p.iterations}});
        json j = {
            {"init",
             {{"surface", c.init.surface},
              {"uniform", c.init.uniform},
              {"transmitter_seeds", c.init.transmitter_seeds},
              {"initial_alpha", c.init.initial_alpha}}},
            {"stage1_phases", phases},
            {"stage2_iterations", c.stage2_iterations},
            {"learning_rates",
             {{"position", c.lr.position},
              {"log_scale", c.lr.log_scale},
              {"rotation", c.lr.rotation},
              {"opacity_logit", c.lr.opacity},
              {"sh", c.lr.sh},
              {"sh_rest_scale", c.lr.sh_rest_scale}}},
            {"stage1_loss", weights_json(c.stage1_loss)},
            {"stage2_loss", weights_json(c.stage2_loss)},
            {"densify",
             {{"interval", c.densify.interval},
              {"start", c.densify.start},
              {"stop_before", c.densify.stop_before},
              {"grad_threshold", c.densify.grad_threshold},
              {"scale_fraction", c.densify.scale_fraction},
              {"prune_alpha", c.densify.prune_alpha},
              {"max_primitives", c.densify.max_primitives}}},
            {"seed", c.seed},
            {"deterministic", c.deterministic},
            {"log_interval", c.log_interval},
            {"scene_diagonal", c.scene_diagonal}};
        return j.dump(2);
    }

    TrainConfig train_config_from_json(const std::string &text)
    {
        json j;
        try
        {
            j = json::parse(text);
        }
        catch (const json::exception &e)
        {
            throw std::invalid_argument(std::string("train config: ") + e.what());
        }
        TrainConfig c;
        try
        {
            if (j.contains("init"))
            {
                const auto &i = j.at("init");
                c.init.surface = i.value("surface", c.init.surface);
                c.init.uniform = i.value("uniform", c.init.uniform);
                c.init.transmitter_seeds = i.value("transmitter_seeds", c.init.transmitter_seeds);
                c.init.initial_alpha = i.value("initial_alpha", c.init.initial_alpha);
            }
            if (j.contains("stage1_phases"))
            {
                c.stage1_phases.clear();
                for (const auto &p : j.at("stage1_phases"))
                    c.stage1_phases.push_back({p.at("scale").get<double>(), p.at("iterations").get<int>()});
            }
            c.stage2_iterations = j.value("stage2_iterations", c.stage2_iterations);
            if (j.contains("learning_rates"))
            {
                const auto &l = j.at("learning_rates");
                c.lr.position = l.value("position", c.lr.position);
                c.lr.log_scale = l.value("log_scale", c.lr.log_scale);
                c.lr.rotation = l.value("rotation", c.lr.rotation);
                c.lr.opacity = l.value("opacity_logit", c.lr.opacity);
                if (l.contains("sh"))
                    c.lr.sh = l.at("sh").get<std::array<double, kNumChannels>>();
                c.lr.sh_rest_scale = l.value("sh_rest_scale", c.lr.sh_rest_scale);
            }
            if (j.contains("stage1_loss"))
                c.stage1_loss = weights_from(j.at("stage1_loss"), c.stage1_loss);
            if (j.contains("stage2_loss"))
                c.stage2_loss = weights_from(j.at("stage2_loss"), c.stage2_loss);
            if (j.contains("densify"))
            {
                const auto &d = j.at("densify");
                c.densify.interval = d.value("interval", c.densify.interval);
                c.densify.start = d.value("start", c.densify.start);
                c.densify.stop_before = d.value("stop_before", c.densify.stop_before);
                c.densify.grad_threshold = d.value("grad_threshold", c.densify.grad_threshold);
                c.densify.scale_fraction = d.value("scale_fraction", c.densify.scale_fraction);
                c.densify.prune_alpha = d.value("prune_alpha", c.densify.prune_alpha);
                c.densify.max_primitives = d.value("max_primitives", c.densify.max_primitives);
            }
            c.seed = j.value("seed", c.seed);
            c.deterministic = j.value("deterministic", c.deterministic);
            c.log_interval = j.value("log_interval", c.log_interval);
            c.scene_diagonal = j.value("scene_diagonal", c.scene_diagonal);
        }
        catch (const json::exception &e)
        {
            throw std::invalid_argument(std::string("train config: ") + e.what());
        }
        c.validate();
        return c;
    }

    RRFModel initial_model(const Scene &scene, const TrainConfig &config)
    {
        config.validate();
        InitOptions io;
        io.initial_alpha = config.init.initial_alpha;
        io.transmitter_seeds = config.init.transmitter_seeds;
        return init_model(scene, config.init.surface, config.init.uniform, config.seed, io);
    }

    TrainConfig load_train_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open train config '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return train_config_from_json(ss.str());
    }

    void save_train_config(const TrainConfig &config, const std::string &path)
    {
        std::ofstream out(path);
        out << train_config_json(config) << "\n";
        if (!out)
            throw std::runtime_error("cannot write train config '" + path + "'");
    }

    // --------------------------------------------------------------------------------------------
    // Training loops

    Planes<float> downsample(const Planes<float> &image, int factor)
    {
        if (factor <= 1)
            return image;
        if (image.height % factor != 0 || image.width % factor != 0)
            throw std::invalid_argument("downsample factor must divide the image size");
        Planes<float> out(image.channels, image.height / factor, image.width / factor);
        const double inv = 1.0 / double(factor * factor);
        for (int c = 0; c < image.channels; ++c)
            for (int r = 0; r < out.height; ++r)
                for (int col = 0; col < out.width; ++col)
                {
                    double s = 0.0;
                    for (int i = 0; i < factor; ++i)
                        for (int j = 0; j < factor; ++j)
                            s += image.at(c, r * factor + i, col * factor + j);
                    out.at(c, r, col) = float(s * inv);
                }
        return out;
    }

    double extent_diagonal(const RRFModel &model)
    {
        if (model.size() < 2)
            return 1.0;
        Vec3<double> lo(model.gaussians[0].position), hi = lo;
        for (const auto &g : model.gaussians)
            for (int k = 0; k < 3; ++k)
            {
                lo[k] = std::min(lo[k], double(g.position[k]));
                hi[k] = std::max(hi[k], double(g.position[k]));
            }
        double d = norm(hi - lo);
        return d > 0.0 ? d : 1.0;
    }

    namespace
    {
        class LogWriter
        {
        public:
            explicit LogWriter(const TrainLog &log) : log_(log), start_(std::chrono::steady_clock::now()) {}

            void record(int stage, int phase, int iteration, const LossTerms &terms, std::size_t primitives)
            {
                if (!log_.out)
                    return;
                json j = {{"stage", stage},
                          {"phase", phase},
                          {"iteration", iteration},
                          {"loss", terms.total},
                          {"visual_l1", terms.visual_l1},
                          {"ssim", terms.ssim},
                          {"gain_l1", terms.gain_l1},
                          {"gain_l2", terms.gain_l2},
                          {"tof_l1", terms.tof_l1},
                          {"primitives", primitives}};
                if (log_.wall_time)
                    j["wall_time"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
                *log_.out << j.dump() << "\n";
            }

        private:
            TrainLog log_;
            std::chrono::steady_clock::time_point start_;
        };

        // Running loss average reported at log points
        struct LossAverage
        {
            LossTerms sum = zero();
            int count = 0;

            static LossTerms zero()
            {
                LossTerms t;
                t.ssim = 0.0;
                return t;
            }

            void add(const LossTerms &t)
            {
                sum.total += t.total;
                sum.visual_l1 += t.visual_l1;
                sum.ssim += t.ssim;
                sum.gain_l1 += t.gain_l1;
                sum.gain_l2 += t.gain_l2;
                sum.tof_l1 += t.tof_l1;
                ++count;
            }
            LossTerms take()
            {
                LossTerms out = sum;
                double inv = count > 0 ? 1.0 / count : 0.0;
                out.total *= inv;
                out.visual_l1 *= inv;
                out.ssim *= inv;
                out.gain_l1 *= inv;
                out.gain_l2 *= inv;
                out.tof_l1 *= inv;
                *this = LossAverage{};
                return out;
            }
        };
    } // namespace

    void train_stage1(RRFModel &model, const std::vector<VisualSample> &views, const TrainConfig &config,
                      const TrainLog &log)
    {
        config.validate();
        if (views.empty())
            throw std::invalid_argument("stage 1 needs at least one visual view");
        const double diag = config.scene_diagonal > 0.0 ? config.scene_diagonal : extent_diagonal(model);
        const RasterSettings settings;
        const ParamMask mask = ParamMask::geometry_and_visual();
        OptimState state(model.size());
        Gradients<float> grads(model.size());
        Gradients<float> stats(model.size());
        Rng rng(config.seed);
        LogWriter writer(log);
        LossAverage average;
        int iteration = 0;

        for (std::size_t phase = 0; phase < config.stage1_phases.size(); ++phase)
        {
            const Phase &ph = config.stage1_phases[phase];
            if (ph.iterations == 0)
                continue;
            const int factor = int(std::lround(1.0 / ph.scale));
            std::vector<Planes<float>> targets;
            targets.reserve(views.size());
            for (const auto &v : views)
                targets.push_back(downsample(to_planes<float>(v.target), factor));

            for (int it = 0; it < ph.iterations; ++it, ++iteration)
            {
                const std::size_t idx = std::size_t(rng.below(views.size()));
                PinholeCamera cam = views[idx].camera;
                cam.resolution = targets[idx].height;
                auto fwd = rasterize(model, cam, settings);
                Planes<float> d_image;
                LossTerms terms = compute_loss(fwd.image, targets[idx], config.stage1_loss, &d_image);
                average.add(terms);

                grads.clear();
                backward_view(model, fwd, d_image, settings, grads);
                check_finite(grads);
                opt_step(model, grads, state, config.lr, mask, diag);
                for (std::size_t i = 0; i < model.size(); ++i)
                {
                    stats.mean2d_norm_sum[i] += grads.mean2d_norm_sum[i];
                    stats.visible_views[i] += grads.visible_views[i];
                }

                const int done = iteration + 1;
                const auto &ds = config.densify;
                if (ds.interval > 0 && done >= ds.start && done < ds.stop_before && done % ds.interval == 0)
                {
                    densify_and_prune(model, stats, state, ds, diag);
                    grads = Gradients<float>(model.size());
                    stats = Gradients<float>(model.size());
                }
                if (config.log_interval > 0 && done % config.log_interval == 0)
                    writer.record(1, int(phase), done, average.take(), model.size());
            }
        }
    }

    void train_stage2(RRFModel &model, const std::vector<SpectrumSample> &spectra, const TrainConfig &config,
                      const TrainLog &log)
    {
        config.validate();
        if (spectra.empty())
            throw std::invalid_argument("stage 2 needs at least one radio spectrum");
        for (const auto &s : spectra)
            if (s.target.projection.kind != ProjectionKind::equirect || s.target.width != 2 * s.target.height)
                throw std::invalid_argument("stage 2 targets must be H x 2H equirect panoramas");
        const RasterSettings settings;
        const ParamMask mask = ParamMask::radio();
        OptimState state(model.size());
        Gradients<float> grads(model.size());
        Rng rng(config.seed ^ 0x5851f42d4c957f2dull);
        LogWriter writer(log);
        LossAverage average;

        std::vector<Planes<float>> targets;
        targets.reserve(spectra.size());
        for (const auto &s : spectra)
            targets.push_back(to_planes<float>(s.target));

        for (int it = 0; it < config.stage2_iterations; ++it)
        {
            const std::size_t idx = std::size_t(rng.below(spectra.size()));
            auto fwd = rasterize_panorama(model, spectra[idx].pose, targets[idx].height, settings);
            Planes<float> d_image;
            LossTerms terms = compute_loss(fwd.image, targets[idx], config.stage2_loss, &d_image);
            average.add(terms);
            grads.clear();
            backward_panorama(model, fwd, d_image, settings, grads);
            check_finite(grads);
            opt_step(model, grads, state, config.lr, mask);
            if (config.log_interval > 0 && (it + 1) % config.log_interval == 0)
                writer.record(2, 0, it + 1, average.take(), model.size());
        }
    }

} // namespace rrf
