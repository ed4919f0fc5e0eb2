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

#include "rrf/loss.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace rrf
{
    namespace
    {
        constexpr int kWindowRadius = 5;
        constexpr double kC1 = 0.01 * 0.01;
        constexpr double kC2 = 0.03 * 0.03;

        const std::array<double, 2 * kWindowRadius + 1> &window_taps()
        {
            static const auto taps = []
            {
                std::array<double, 2 * kWindowRadius + 1> t{};
                double sum = 0.0;
                for (int i = -kWindowRadius; i <= kWindowRadius; ++i)
                    sum += t[std::size_t(i + kWindowRadius)] = std::exp(-0.5 * i * i / (1.5 * 1.5));
                for (double &v : t)
                    v /= sum;
                return t;
            }();
            return taps;
        }

        // Separable zero-padded Gaussian filter. The kernel is symmetric so this is also its own adjoint.
        void blur(const std::vector<double> &in, std::vector<double> &out, int h, int w)
        {
            const auto &k = window_taps();
            std::vector<double> tmp(in.size(), 0.0);
            for (int r = 0; r < h; ++r)
                for (int c = 0; c < w; ++c)
                {
                    double s = 0.0;
                    for (int i = -kWindowRadius; i <= kWindowRadius; ++i)
                    {
                        int cc = c + i;
                        if (cc >= 0 && cc < w)
                            s += k[std::size_t(i + kWindowRadius)] * in[std::size_t(r) * w + cc];
                    }
                    tmp[std::size_t(r) * w + c] = s;
                }
            out.assign(in.size(), 0.0);
            for (int r = 0; r < h; ++r)
                for (int c = 0; c < w; ++c)
                {
                    double s = 0.0;
                    for (int i = -kWindowRadius; i <= kWindowRadius; ++i)
                    {
                        int rr = r + i;
                        if (rr >= 0 && rr < h)
                            s += k[std::size_t(i + kWindowRadius)] * tmp[std::size_t(rr) * w + c];
                    }
                    out[std::size_t(r) * w + c] = s;
                }
        }

        double sign(double v) { return double(v > 0.0) - double(v < 0.0); }
    } // namespace

    template <typename T>
    double ssim(const T *x, const T *y, int h, int w, T *grad_x)
    {
        const std::size_t n = std::size_t(h) * w;
        std::vector<double> xv(x, x + n), yv(y, y + n), xx(n), yy(n), xy(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            xx[i] = xv[i] * xv[i];
            yy[i] = yv[i] * yv[i];
            xy[i] = xv[i] * yv[i];
        }
        std::vector<double> mx, my, exx, eyy, exy;
        blur(xv, mx, h, w);
        blur(yv, my, h, w);
        blur(xx, exx, h, w);
        blur(yy, eyy, h, w);
        blur(xy, exy, h, w);

        double total = 0.0;
        std::vector<double> d_mx, d_sxx, d_sxy;
        if (grad_x)
        {
            d_mx.resize(n);
            d_sxx.resize(n);
            d_sxy.resize(n);
        }
        for (std::size_t i = 0; i < n; ++i)
        {
            const double sxx = exx[i] - mx[i] * mx[i], syy = eyy[i] - my[i] * my[i], sxy = exy[i] - mx[i] * my[i];
            const double n1 = 2.0 * mx[i] * my[i] + kC1, n2 = 2.0 * sxy + kC2;
            const double d1 = mx[i] * mx[i] + my[i] * my[i] + kC1, d2 = sxx + syy + kC2;
            const double s = n1 * n2 / (d1 * d2);
            total += s;
            if (grad_x)
            {
                // Partials with respect to the local mean, variance and covariance of x
                const double ds_dm = 2.0 * my[i] * n2 / (d1 * d2) - s * 2.0 * mx[i] / d1;
                const double ds_dsxx = -s / d2;
                const double ds_dsxy = 2.0 * n1 / (d1 * d2);
                d_mx[i] = (ds_dm - 2.0 * mx[i] * ds_dsxx - my[i] * ds_dsxy) / double(n);
                d_sxx[i] = ds_dsxx / double(n);
                d_sxy[i] = ds_dsxy / double(n);
            }
        }
        if (grad_x)
        {
            std::vector<double> a, b, c;
            blur(d_mx, a, h, w);
            blur(d_sxx, b, h, w);
            blur(d_sxy, c, h, w);
            for (std::size_t i = 0; i < n; ++i)
                grad_x[i] = T(a[i] + 2.0 * xv[i] * b[i] + yv[i] * c[i]);
        }
        return total / double(n);
    }

    template <typename T>
    LossTerms compute_loss(const Planes<T> &rendered, const Planes<T> &target, const LossWeights &weights,
                           Planes<T> *grad)
    {
        if (rendered.channels != target.channels || rendered.height != target.height ||
            rendered.width != target.width)
            throw std::invalid_argument("loss: rendered and target shapes differ");
        if (rendered.channels < kNumChannels)
            throw std::invalid_argument("loss: expected visual, gain and tof channels");

        const int h = rendered.height, w = rendered.width;
        const std::size_t n = rendered.plane_size();
        const double inv_n = 1.0 / double(n);
        if (grad)
            *grad = Planes<T>(rendered.channels, h, w);

        LossTerms terms;
        auto plane = [&](const Planes<T> &p, int ch) { return p.data.data() + std::size_t(ch) * n; };

        if (weights.visual != 0.0)
        {
            const T *r = plane(rendered, kVisual), *t = plane(target, kVisual);
            T *g = grad ? grad->data.data() + std::size_t(kVisual) * n : nullptr;
            const double l1_mix = 1.0 - weights.ssim_mix;
            for (std::size_t i = 0; i < n; ++i)
            {
                double d = double(r[i]) - double(t[i]);
                terms.visual_l1 += std::abs(d);
                if (g)
                    g[i] = T(weights.visual * l1_mix * sign(d) * inv_n);
            }
            terms.visual_l1 *= inv_n;
            std::vector<T> ds(grad ? n : 0);
            terms.ssim = ssim(r, t, h, w, grad ? ds.data() : nullptr);
            if (g)
                for (std::size_t i = 0; i < n; ++i)
                    g[i] += T(-weights.visual * weights.ssim_mix * double(ds[i]));
            terms.total += weights.visual * (l1_mix * terms.visual_l1 + weights.ssim_mix * (1.0 - terms.ssim));
        }

        if (weights.gain != 0.0 || weights.gain_l2 != 0.0)
        {
            const T *r = plane(rendered, kGain), *t = plane(target, kGain);
            T *g = grad ? grad->data.data() + std::size_t(kGain) * n : nullptr;
            for (std::size_t i = 0; i < n; ++i)
            {
                double d = double(r[i]) - double(t[i]);
                terms.gain_l1 += std::abs(d);
                terms.gain_l2 += d * d;
                if (g)
                    g[i] = T((weights.gain * sign(d) + 2.0 * weights.gain_l2 * d) * inv_n);
            }
            terms.gain_l1 *= inv_n;
            terms.gain_l2 *= inv_n;
            terms.total += weights.gain * terms.gain_l1 + weights.gain_l2 * terms.gain_l2;
        }

        if (weights.tof != 0.0)
        {
            const T *r = plane(rendered, kTof), *t = plane(target, kTof), *tg = plane(target, kGain);
            for (std::size_t i = 0; i < n; ++i)
                if (double(tg[i]) > weights.mask_threshold)
                {
                    terms.tof_l1 += std::abs(double(r[i]) - double(t[i]));
                    ++terms.tof_pixels;
                }
            if (terms.tof_pixels > 0)
            {
                const double inv_m = 1.0 / double(terms.tof_pixels);
                terms.tof_l1 *= inv_m;
                if (grad)
                {
                    T *g = grad->data.data() + std::size_t(kTof) * n;
                    for (std::size_t i = 0; i < n; ++i)
                        if (double(tg[i]) > weights.mask_threshold)
                            g[i] = T(weights.tof * sign(double(r[i]) - double(t[i])) * inv_m);
                }
            }
            terms.total += weights.tof * terms.tof_l1;
        }
        return terms;
    }

    template <typename T>
    Planes<T> to_planes(const RadioSpatialSpectrum &s)
    {
        Planes<T> p(s.channels, s.height, s.width);
        for (std::size_t i = 0; i < s.data.size(); ++i)
            p.data[i] = T(s.data[i]);
        return p;
    }

    LossTerms loss(const RadioSpatialSpectrum &rendered, const RadioSpatialSpectrum &target, const LossWeights &weights)
    {
        if (rendered.projection.kind != target.projection.kind)
            throw std::invalid_argument("loss: rendered and target projections differ");
        return compute_loss(to_planes<double>(rendered), to_planes<double>(target), weights);
    }

    template double ssim(const float *, const float *, int, int, float *);
    template double ssim(const double *, const double *, int, int, double *);
    template LossTerms compute_loss(const Planes<float> &, const Planes<float> &, const LossWeights &, Planes<float> *);
    template LossTerms compute_loss(const Planes<double> &, const Planes<double> &, const LossWeights &,
                                    Planes<double> *);
    template Planes<float> to_planes(const RadioSpatialSpectrum &);
    template Planes<double> to_planes(const RadioSpatialSpectrum &);

} // namespace rrf
