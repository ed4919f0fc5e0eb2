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

#include "rrf/gradcheck.hpp"
#include "rrf/camera.hpp"
#include "rrf/random.hpp"

#include <cmath>

namespace rrf
{
    BasicModel<double> random_gradcheck_model(int primitives, int sh_degree, std::uint64_t seed)
    {
        Rng rng(seed);
        BasicModel<double> model;
        model.sh_degree = sh_degree;
        const int nk = sh_coeff_count(sh_degree);
        for (int i = 0; i < primitives; ++i)
        {
            GaussianPrimitive<double> g;
            double depth = rng.uniform(2.0, 4.0);
            g.position = {depth, rng.uniform(-0.9, 0.9) * depth, rng.uniform(-0.9, 0.9) * depth};
            for (int k = 0; k < 3; ++k)
                g.log_scale[k] = std::log(rng.uniform(0.08, 0.45));
            // Deliberately not unit length so the normalization is exercised
            Quat<double> q(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                           rng.uniform(-1.0, 1.0));
            double scale = rng.uniform(0.6, 1.4) / q.norm();
            g.rotation = {q.w * scale, q.x * scale, q.y * scale, q.z * scale};
            g.opacity_logit = logit(rng.uniform(0.05, 0.88));
            for (int ch = 0; ch < kNumChannels; ++ch)
                for (int k = 0; k < nk; ++k)
                    g.coeff(ch, k) = k == 0 ? rng.uniform(0.2, 2.0) : rng.uniform(-0.4, 0.4);
            model.gaussians.push_back(g);
        }
        return model;
    }

    double view_loss_and_gradient(const BasicModel<double> &model, const PinholeCamera &cam,
                                  const Planes<double> &target, const LossWeights &weights,
                                  Gradients<double> *grads, const RasterSettings &settings)
    {
        auto fwd = rasterize(model, cam, settings);
        Planes<double> d_image;
        LossTerms terms = compute_loss(fwd.image, target, weights, grads ? &d_image : nullptr);
        if (grads)
            backward_view(model, fwd, d_image, settings, *grads);
        return terms.total;
    }

    namespace
    {
        struct ParamRef
        {
            ParamGroup group;
            double *value;
            double analytic;
        };

        // Every scalar parameter of one primitive along with its analytic derivative
        std::vector<ParamRef> parameters(GaussianPrimitive<double> &g, const GaussianPrimitive<double> &grad, int nk)
        {
            std::vector<ParamRef> out;
            for (int k = 0; k < 3; ++k)
                out.push_back({kGroupPosition, &g.position[k], grad.position[k]});
            for (int k = 0; k < 3; ++k)
                out.push_back({kGroupLogScale, &g.log_scale[k], grad.log_scale[k]});
            for (int k = 0; k < 4; ++k)
                out.push_back({kGroupRotation, &g.rotation[k], grad.rotation[k]});
            out.push_back({kGroupOpacity, &g.opacity_logit, grad.opacity_logit});
            for (int ch = 0; ch < kNumChannels; ++ch)
                for (int k = 0; k < nk; ++k)
                    out.push_back({kGroupSh, &g.coeff(ch, k), grad.coeff(ch, k)});
            return out;
        }
    } // namespace

    GradcheckReport gradcheck(std::uint64_t seed, const GradcheckOptions &options)
    {
        BasicModel<double> model = random_gradcheck_model(options.primitives, options.sh_degree, seed);
        PinholeCamera cam = forward_camera(RxPose{}, kPi / 2.0, options.resolution);

        Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
        Planes<double> target(kNumChannels, options.resolution, options.resolution);
        for (double &v : target.data)
            v = rng.uniform(0.0, 1.0);
        LossWeights weights;
        weights.visual = 1.0;
        weights.gain = 1.0;
        weights.gain_l2 = 1.0;
        weights.tof = 1.0;
        weights.mask_threshold = 0.5;
        const RasterSettings settings;

        Gradients<double> grads(model.size());
        if (options.single_precision)
        {
            BasicModel<float> mf = model.cast<float>();
            Planes<float> tf(target.channels, target.height, target.width);
            for (std::size_t i = 0; i < tf.data.size(); ++i)
                tf.data[i] = float(target.data[i]);
            auto fwd = rasterize(mf, cam, settings);
            Planes<float> d_image;
            compute_loss(fwd.image, tf, weights, &d_image);
            Gradients<float> gf(mf.size());
            backward_view(mf, fwd, d_image, settings, gf);
            for (std::size_t i = 0; i < model.size(); ++i)
                grads.params[i] = gf.params[i].cast<double>();
        }
        else
        {
            view_loss_and_gradient(model, cam, target, weights, &grads, settings);
        }

        auto eval = [&]() { return view_loss_and_gradient(model, cam, target, weights, nullptr, settings); };
        const double h = options.step;
        const int nk = sh_coeff_count(options.sh_degree);

        GradcheckReport report;
        for (std::size_t i = 0; i < model.size(); ++i)
        {
            for (ParamRef p : parameters(model.gaussians[i], grads.params[i], nk))
            {
                const double x0 = *p.value;
                auto central = [&](double step)
                {
                    *p.value = x0 + step;
                    double fp = eval();
                    *p.value = x0 - step;
                    double fm = eval();
                    *p.value = x0;
                    return (fp - fm) / (2.0 * step);
                };
                double numeric = central(h);
                double rel = std::abs(p.analytic - numeric) /
                             (std::max(std::abs(p.analytic), std::abs(numeric)) + options.abs_floor);
                double limit = options.single_precision ? 1e-2 : 1e-3;
                if (rel > limit)
                {
                    // A discontinuity inside the stencil makes the h and h/2 estimates disagree
                    double half = central(0.5 * h);
                    double scale = std::max(std::abs(numeric), std::abs(half)) + options.abs_floor;
                    if (std::abs(numeric - half) > options.smooth_tol * scale)
                    {
                        ++report.skipped;
                        continue;
                    }
                }
                ++report.checked;
                auto &gm = report.group_max[std::size_t(p.group)];
                gm = std::max(gm, rel);
                if (rel > report.max_rel_error)
                {
                    report.max_rel_error = rel;
                    report.worst_primitive = int(i);
                    report.worst_group = kParamGroupNames[std::size_t(p.group)];
                }
            }
        }
        return report;
    }

} // namespace rrf
