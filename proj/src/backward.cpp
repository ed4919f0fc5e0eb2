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

#include "rrf/backward.hpp"
#include "rrf/parallel.hpp"
#include "tile_rows.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rrf
{
    template <typename T>
    void Gradients<T>::clear()
    {
        std::fill(params.begin(), params.end(), zero_gradient<T>());
        std::fill(mean2d_norm_sum.begin(), mean2d_norm_sum.end(), 0.0);
        std::fill(visible_views.begin(), visible_views.end(), 0);
    }

    template <typename T>
    GaussianPrimitive<T> project_backward(const GaussianPrimitive<T> &g, int sh_degree, const CameraFrame<T> &cam,
                                          const RasterSettings &settings, const ProjectedGrad<T> &grad)
    {
        GaussianPrimitive<T> out = zero_gradient<T>();
        const Mat3<T> &w = cam.world_to_cam;
        const Vec3<T> pc = w * (g.position - cam.origin);
        const T f = cam.focal, iz = T(1) / pc.z;

        // Forward quantities
        const Quat<T> q = g.rotation;
        const T qn = q.norm();
        const Quat<T> qh = q.normalized();
        const Mat3<T> r = qh.to_matrix();
        const T s[3] = {std::exp(g.log_scale.x), std::exp(g.log_scale.y), std::exp(g.log_scale.z)};
        Mat3<T> m; // R S
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                m.m[i][j] = r.m[i][j] * s[j];
        const Mat3<T> sigma = covariance(g);

        const T j00 = f * iz, j02 = -f * pc.x * iz * iz, j11 = f * iz, j12 = -f * pc.y * iz * iz;
        T t[2][3];
        for (int k = 0; k < 3; ++k)
        {
            t[0][k] = j00 * w.m[0][k] + j02 * w.m[2][k];
            t[1][k] = j11 * w.m[1][k] + j12 * w.m[2][k];
        }
        T ts[2][3];
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 3; ++k)
                ts[i][k] = t[i][0] * sigma.m[0][k] + t[i][1] * sigma.m[1][k] + t[i][2] * sigma.m[2][k];
        const T a = ts[0][0] * t[0][0] + ts[0][1] * t[0][1] + ts[0][2] * t[0][2];
        const T b = ts[0][0] * t[1][0] + ts[0][1] * t[1][1] + ts[0][2] * t[1][2];
        const T c = ts[1][0] * t[1][0] + ts[1][1] * t[1][1] + ts[1][2] * t[1][2];
        const T fl = T(settings.cov2d_floor);
        const T af = a + fl, cf = c + fl;
        const T det0 = a * c - b * b, det1 = af * cf - b * b;
        const T rho = std::sqrt(det0 / det1);
        const T sig = sigmoid(g.opacity_logit);

        // alpha = sigmoid(logit) * sqrt(det0 / det1)
        out.opacity_logit = grad.alpha * rho * sig * (T(1) - sig);
        const T d_rho = grad.alpha * sig;
        T d_det0 = d_rho * rho / (T(2) * det0);
        T d_det1 = -d_rho * rho / (T(2) * det1);

        // conic = (cf, -b, af) / det1
        const T ca = cf / det1, cb = -b / det1, cc = af / det1;
        d_det1 += -(grad.conic.a * ca + grad.conic.b * cb + grad.conic.c * cc) / det1;
        T d_af = grad.conic.c / det1, d_cf = grad.conic.a / det1, d_b = -grad.conic.b / det1;
        d_af += d_det1 * cf;
        d_cf += d_det1 * af;
        d_b += -T(2) * b * d_det1;
        T d_a = d_af + d_det0 * c;
        T d_c = d_cf + d_det0 * a;
        d_b += -T(2) * b * d_det0;

        // cov2d = T Sigma T^T with the symmetric upstream G
        const T gm[2][2] = {{d_a, d_b / T(2)}, {d_b / T(2), d_c}};
        T gt[2][3]; // G T
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 3; ++k)
                gt[i][k] = gm[i][0] * t[0][k] + gm[i][1] * t[1][k];
        Mat3<T> d_sigma; // T^T G T
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k)
                d_sigma.m[i][k] = t[0][i] * gt[0][k] + t[1][i] * gt[1][k];
        T d_t[2][3]; // 2 G T Sigma
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 3; ++k)
                d_t[i][k] = T(2) * (gt[i][0] * sigma.m[0][k] + gt[i][1] * sigma.m[1][k] + gt[i][2] * sigma.m[2][k]);

        // T = J W
        T d_j[2][3];
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 3; ++k)
                d_j[i][k] = d_t[i][0] * w.m[k][0] + d_t[i][1] * w.m[k][1] + d_t[i][2] * w.m[k][2];
        Vec3<T> d_pc;
        const T iz2 = iz * iz, iz3 = iz2 * iz;
        d_pc.x = d_j[0][2] * (-f * iz2);
        d_pc.y = d_j[1][2] * (-f * iz2);
        d_pc.z = (d_j[0][0] + d_j[1][1]) * (-f * iz2) + d_j[0][2] * (T(2) * f * pc.x * iz3) +
                 d_j[1][2] * (T(2) * f * pc.y * iz3);

        // mean2d = f (x, y) / z + (cx, cy)
        d_pc.x += grad.mean2d.x * f * iz;
        d_pc.y += grad.mean2d.y * f * iz;
        d_pc.z += -(grad.mean2d.x * pc.x + grad.mean2d.y * pc.y) * f * iz2;
        out.position = w.transpose_mul(d_pc);

        // Sigma = M M^T, M = R S
        Mat3<T> d_m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                d_m.m[i][j] = T(2) * (d_sigma.m[i][0] * m.m[0][j] + d_sigma.m[i][1] * m.m[1][j] + d_sigma.m[i][2] * m.m[2][j]);
        Mat3<T> d_r;
        for (int j = 0; j < 3; ++j)
        {
            T ds = T(0);
            for (int i = 0; i < 3; ++i)
            {
                d_r.m[i][j] = d_m.m[i][j] * s[j];
                ds += d_m.m[i][j] * r.m[i][j];
            }
            out.log_scale[j] = ds * s[j];
        }

        // Rotation matrix of the normalized quaternion
        const T qw = qh.w, qx = qh.x, qy = qh.y, qz = qh.z;
        const auto &dr = d_r.m;
        Quat<T> dqh;
        dqh.w = T(2) * (-qz * dr[0][1] + qy * dr[0][2] + qz * dr[1][0] - qx * dr[1][2] - qy * dr[2][0] + qx * dr[2][1]);
        dqh.x = T(2) * (qy * dr[0][1] + qz * dr[0][2] + qy * dr[1][0] - qw * dr[1][2] + qz * dr[2][0] + qw * dr[2][1]) -
                T(4) * qx * (dr[1][1] + dr[2][2]);
        dqh.y = T(2) * (qx * dr[0][1] + qw * dr[0][2] + qx * dr[1][0] + qz * dr[1][2] - qw * dr[2][0] + qz * dr[2][1]) -
                T(4) * qy * (dr[0][0] + dr[2][2]);
        dqh.z = T(2) * (-qw * dr[0][1] + qx * dr[0][2] + qw * dr[1][0] + qy * dr[1][2] + qx * dr[2][0] + qy * dr[2][1]) -
                T(4) * qz * (dr[0][0] + dr[1][1]);
        const T proj = qh.w * dqh.w + qh.x * dqh.x + qh.y * dqh.y + qh.z * dqh.z;
        out.rotation = {(dqh.w - qh.w * proj) / qn, (dqh.x - qh.x * proj) / qn, (dqh.y - qh.y * proj) / qn,
                        (dqh.z - qh.z * proj) / qn};

        // Channel values from SH at the unit direction toward the camera
        const Vec3<T> rel = cam.origin - g.position;
        const T len = norm(rel);
        const Vec3<T> dir = rel / len;
        T basis[kMaxShCoeffs];
        Vec3<T> basis_grad[kMaxShCoeffs];
        sh_basis(sh_degree, dir, basis);
        sh_basis_grad(sh_degree, dir, basis_grad);
        const int nk = sh_coeff_count(sh_degree);
        Vec3<T> d_dir;
        for (int ch = 0; ch < kNumChannels; ++ch)
        {
            const T dv = grad.values[std::size_t(ch)];
            if (dv == T(0))
                continue;
            for (int k = 0; k < nk; ++k)
            {
                out.coeff(ch, k) = dv * basis[k];
                d_dir = d_dir + basis_grad[k] * (dv * g.coeff(ch, k));
            }
        }
        const Vec3<T> d_rel = (d_dir - dir * dot(dir, d_dir)) / len;
        out.position = out.position - d_rel;
        return out;
    }

    namespace
    {
        template <typename T>
        struct Contribution
        {
            std::uint32_t local;
            T alpha;       // Contribution density as composited
            T gauss;       // exp(-q / 2)
            T trans;       // Transmittance in front of it
            bool clamped;
        };

        // Reverse sweep over one tile, accumulating into that tile's slice of entry_grads
        template <typename T>
        void backward_tile(const std::vector<ProjectedGaussian<T>> &projected, const TileBins &bins, int tile,
                           const RasterSettings &settings, const Planes<T> &d_image,
                           std::vector<ProjectedGrad<T>> &entry_grads)
        {
            if (bins.tile(tile).empty())
                return;
            const std::size_t base = bins.offsets[std::size_t(tile)];
            thread_local detail::TileWork<T> work;
            work.build(projected, bins, tile, d_image.width, d_image.height, settings);
            const auto &local = work.local;

            const T limit = T(settings.footprint_sigma * settings.footprint_sigma);
            const T min_alpha = T(settings.min_alpha), max_alpha = T(settings.max_alpha), t_stop = T(settings.t_stop);
            const std::size_t plane = d_image.plane_size();
            thread_local std::vector<Contribution<T>> seq;
            for (int r = work.row0; r < work.row1; ++r)
            {
                const T py = T(r) + T(0.5);
                const auto row = work.row(r);
                for (int c = work.col0; c < work.col1; ++c)
                {
                    const std::size_t k = std::size_t(r) * d_image.width + c;
                    const T dc[kNumChannels] = {d_image.data[k], d_image.data[plane + k], d_image.data[2 * plane + k]};
                    if (dc[0] == T(0) && dc[1] == T(0) && dc[2] == T(0))
                        continue;
                    const int rel = c - work.col0;
                    const T px = T(c) + T(0.5);

                    // Forward replay, identical arithmetic to the renderer
                    seq.clear();
                    T trans = T(1);
                    for (const auto &span : row)
                    {
                        if (rel < span.col0 || rel > span.col1)
                            continue;
                        const std::uint32_t j = span.local;
                        const auto &g = local[j];
                        T dx = px - g.mx, dy = py - g.my;
                        T q = g.ca * dx * dx + T(2) * g.cb * dx * dy + g.cc * dy * dy;
                        if (q > limit)
                            continue;
                        T ex = std::exp(T(-0.5) * q);
                        T a = g.alpha * ex;
                        if (a < min_alpha)
                            continue;
                        bool clamped = a > max_alpha;
                        a = std::min(a, max_alpha);
                        seq.push_back({j, a, ex, trans, clamped});
                        trans *= (T(1) - a);
                        if (trans < t_stop)
                            break;
                    }

                    T acc[kNumChannels] = {T(0), T(0), T(0)};
                    for (auto it = seq.rbegin(); it != seq.rend(); ++it)
                    {
                        const auto &g = local[it->local];
                        auto &eg = entry_grads[base + it->local];
                        const T wgt = it->alpha * it->trans;
                        T d_a = T(0);
                        for (int ch = 0; ch < kNumChannels; ++ch)
                        {
                            eg.values[std::size_t(ch)] += wgt * dc[ch];
                            d_a += dc[ch] * (g.v[ch] - acc[ch]);
                            acc[ch] = it->alpha * g.v[ch] + (T(1) - it->alpha) * acc[ch];
                        }
                        d_a *= it->trans;
                        if (it->clamped)
                            continue;
                        eg.alpha += d_a * it->gauss;
                        const T d_q = T(-0.5) * d_a * it->alpha;
                        const T dx = px - g.mx, dy = py - g.my;
                        eg.conic.a += d_q * dx * dx;
                        eg.conic.b += d_q * T(2) * dx * dy;
                        eg.conic.c += d_q * dy * dy;
                        eg.mean2d.x += -d_q * T(2) * (g.ca * dx + g.cb * dy);
                        eg.mean2d.y += -d_q * T(2) * (g.cb * dx + g.cc * dy);
                    }
                }
            }
        }
    } // namespace

    template <typename T>
    void backward_view(const BasicModel<T> &model, const ViewRender<T> &forward, const Planes<T> &d_image,
                       const RasterSettings &settings, Gradients<T> &out)
    {
        if (out.size() != model.size())
            throw std::invalid_argument("gradient buffer does not match the model size");
        if (d_image.height != forward.image.height || d_image.width != forward.image.width ||
            d_image.channels != kNumChannels)
            throw std::invalid_argument("image gradient does not match the rendered view");

        const auto &bins = forward.bins;
        std::vector<ProjectedGrad<T>> entry_grads(bins.entries.size());
        parallel_for(std::size_t(bins.tile_count()), [&](std::size_t t)
                     { backward_tile(forward.projected, bins, int(t), settings, d_image, entry_grads); });

        // Fixed-order reduction: tiles in index order
        std::vector<ProjectedGrad<T>> grads(forward.projected.size());
        for (std::size_t e = 0; e < bins.entries.size(); ++e)
        {
            auto &dst = grads[bins.entries[e]];
            const auto &src = entry_grads[e];
            dst.mean2d.x += src.mean2d.x;
            dst.mean2d.y += src.mean2d.y;
            dst.conic.a += src.conic.a;
            dst.conic.b += src.conic.b;
            dst.conic.c += src.conic.c;
            dst.alpha += src.alpha;
            for (int ch = 0; ch < kNumChannels; ++ch)
                dst.values[std::size_t(ch)] += src.values[std::size_t(ch)];
        }

        // Each primitive appears at most once per view, so the writes below are disjoint
        const double ndc = 0.5 * forward.frame.resolution;
        parallel_for(
            forward.projected.size(), [&](std::size_t i)
            {
                const auto &p = forward.projected[i];
                const auto &pg = grads[i];
                const std::size_t idx = p.index;
                out.visible_views[idx] += 1;
                out.mean2d_norm_sum[idx] += std::hypot(double(pg.mean2d.x), double(pg.mean2d.y)) * ndc;
                auto d = project_backward(model.gaussians[idx], model.sh_degree, forward.frame, settings, pg);
                auto &acc = out.params[idx];
                acc.position = acc.position + d.position;
                acc.log_scale = acc.log_scale + d.log_scale;
                acc.rotation = {acc.rotation.w + d.rotation.w, acc.rotation.x + d.rotation.x,
                                acc.rotation.y + d.rotation.y, acc.rotation.z + d.rotation.z};
                acc.opacity_logit += d.opacity_logit;
                for (std::size_t k = 0; k < acc.sh.size(); ++k)
                    acc.sh[k] += d.sh[k];
            },
            64);
    }

    template <typename T>
    void backward_panorama(const BasicModel<T> &model, const PanoramaRender<T> &forward, const Planes<T> &d_image,
                           const RasterSettings &settings, Gradients<T> &out)
    {
        const PanoramaLayout &layout = PanoramaLayout::get(forward.image.height);
        if (d_image.height != layout.height || d_image.width != layout.width || d_image.channels != kNumChannels)
            throw std::invalid_argument("image gradient does not match the panorama");
        const int r = layout.face_resolution;
        std::array<Planes<T>, 6> d_faces;
        for (auto &f : d_faces)
            f = Planes<T>(kNumChannels, r, r);
        const std::size_t plane = d_image.plane_size(), face_plane = std::size_t(r) * r;
        for (std::size_t k = 0; k < layout.samples.size(); ++k)
        {
            const auto &s = layout.samples[k];
            auto &dst = d_faces[std::size_t(s.face)].data;
            for (int ch = 0; ch < kNumChannels; ++ch)
            {
                const T g = d_image.data[std::size_t(ch) * plane + k];
                if (g == T(0))
                    continue;
                T *p = dst.data() + std::size_t(ch) * face_plane;
                for (int i = 0; i < 4; ++i)
                    p[s.pixel[std::size_t(i)]] += T(s.weight[std::size_t(i)]) * g;
            }
        }
        for (int f = 0; f < 6; ++f)
            backward_view(model, forward.faces[std::size_t(f)], d_faces[std::size_t(f)], settings, out);
    }

    template <typename T>
    void check_finite(const Gradients<T> &grads)
    {
        for (std::size_t i = 0; i < grads.size(); ++i)
        {
            const auto &g = grads.params[i];
            bool ok = std::isfinite(g.opacity_logit);
            for (int k = 0; k < 3; ++k)
                ok = ok && std::isfinite(g.position[k]) && std::isfinite(g.log_scale[k]);
            for (int k = 0; k < 4; ++k)
                ok = ok && std::isfinite(g.rotation[k]);
            for (T v : g.sh)
                ok = ok && std::isfinite(v);
            if (!ok)
                throw std::runtime_error("non-finite gradient for primitive " + std::to_string(i));
        }
    }

#define RRF_INSTANTIATE(T)                                                                                       \
    template struct Gradients<T>;                                                                                \
    template GaussianPrimitive<T> project_backward(const GaussianPrimitive<T> &, int, const CameraFrame<T> &,    \
                                                   const RasterSettings &, const ProjectedGrad<T> &);            \
    template void backward_view(const BasicModel<T> &, const ViewRender<T> &, const Planes<T> &,                 \
                                const RasterSettings &, Gradients<T> &);                                         \
    template void backward_panorama(const BasicModel<T> &, const PanoramaRender<T> &, const Planes<T> &,         \
                                    const RasterSettings &, Gradients<T> &);                                     \
    template void check_finite(const Gradients<T> &);

    RRF_INSTANTIATE(float)
    RRF_INSTANTIATE(double)

#undef RRF_INSTANTIATE

} // namespace rrf
