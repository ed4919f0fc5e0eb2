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

#include "rrf/rasterizer.hpp"
#include "rrf/parallel.hpp"
#include "tile_rows.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace rrf
{
    template <typename T>
    CameraFrame<T> CameraFrame<T>::from(const PinholeCamera &cam)
    {
        cam.validate();
        CameraFrame<T> f;
        f.world_to_cam = cam.pose.orientation.normalized().to_matrix().transposed().template cast<T>();
        f.origin = Vec3<T>(cam.pose.position);
        f.focal = T(cam.focal());
        f.cx = T(0.5 * cam.resolution);
        f.cy = T(0.5 * cam.resolution);
        f.tan_half_fov = T(std::tan(0.5 * cam.fov));
        f.resolution = cam.resolution;
        f.near_plane = T(cam.near_plane);
        f.far_plane = T(cam.far_plane);
        return f;
    }

    template <typename T>
    std::optional<ProjectedGaussian<T>> project(const GaussianPrimitive<T> &g, int sh_degree, const CameraFrame<T> &cam,
                                                const RasterSettings &settings)
    {
        const Vec3<T> rel = g.position - cam.origin;
        const Vec3<T> pc = cam.world_to_cam * rel;
        if (!(pc.z > cam.near_plane && pc.z < cam.far_plane))
            return std::nullopt;

        // Conservative sphere-vs-frustum reject before the covariance work
        {
            T s_max = std::exp(std::max({g.log_scale.x, g.log_scale.y, g.log_scale.z}));
            T r = T(2) * (T(settings.footprint_sigma) * s_max + T(2) * pc.z / cam.focal);
            T lim = cam.tan_half_fov * pc.z + r * std::sqrt(T(1) + cam.tan_half_fov * cam.tan_half_fov);
            if (std::abs(pc.x) > lim || std::abs(pc.y) > lim)
                return std::nullopt;
        }

        const T f = cam.focal, iz = T(1) / pc.z;
        ProjectedGaussian<T> out;
        out.mean2d = {f * pc.x * iz + cam.cx, f * pc.y * iz + cam.cy};
        out.depth = pc.z;

        // Screen covariance J W Sigma W^T J^T
        const Mat3<T> sigma = covariance(g);
        const T j00 = f * iz, j02 = -f * pc.x * iz * iz, j11 = f * iz, j12 = -f * pc.y * iz * iz;
        T t[2][3];
        for (int k = 0; k < 3; ++k)
        {
            t[0][k] = j00 * cam.world_to_cam.m[0][k] + j02 * cam.world_to_cam.m[2][k];
            t[1][k] = j11 * cam.world_to_cam.m[1][k] + j12 * cam.world_to_cam.m[2][k];
        }
        T ts[2][3];
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 3; ++k)
                ts[i][k] = t[i][0] * sigma.m[0][k] + t[i][1] * sigma.m[1][k] + t[i][2] * sigma.m[2][k];
        const T a = ts[0][0] * t[0][0] + ts[0][1] * t[0][1] + ts[0][2] * t[0][2];
        const T b = ts[0][0] * t[1][0] + ts[0][1] * t[1][1] + ts[0][2] * t[1][2];
        const T c = ts[1][0] * t[1][0] + ts[1][1] * t[1][1] + ts[1][2] * t[1][2];

        const T det0 = a * c - b * b;
        if (!(det0 > T(0)))
            return std::nullopt;
        const T af = a + T(settings.cov2d_floor), cf = c + T(settings.cov2d_floor);
        const T det1 = af * cf - b * b;
        out.cov2d = {af, b, cf};
        out.conic = {cf / det1, -b / det1, af / det1};
        out.alpha = g.alpha() * std::sqrt(det0 / det1);

        const T k = T(settings.footprint_sigma);
        out.extent = {k * std::sqrt(af), k * std::sqrt(cf)};
        const T res = T(cam.resolution);
        if (out.mean2d.x + out.extent.x < T(0) || out.mean2d.x - out.extent.x > res ||
            out.mean2d.y + out.extent.y < T(0) || out.mean2d.y - out.extent.y > res)
            return std::nullopt;

        // Channel values seen from the camera
        Vec3<T> dir = cam.origin - g.position;
        dir = dir / norm(dir);
        T basis[kMaxShCoeffs];
        sh_basis(sh_degree, dir, basis);
        const int nk = sh_coeff_count(sh_degree);
        for (int ch = 0; ch < kNumChannels; ++ch)
        {
            T v = T(0);
            for (int j = 0; j < nk; ++j)
                v += g.coeff(ch, j) * basis[j];
            out.values[std::size_t(ch)] = v;
        }
        return out;
    }

    // Minimum of the quadratic form d^T conic d over d in [x0, x1] x [y0, y1]
    template <typename T>
    static T rect_min_power(const Sym2<T> &conic, T x0, T x1, T y0, T y1)
    {
        if (x0 <= T(0) && x1 >= T(0) && y0 <= T(0) && y1 >= T(0))
            return T(0);
        auto q = [&](T dx, T dy) { return conic.a * dx * dx + T(2) * conic.b * dx * dy + conic.c * dy * dy; };
        T best = std::numeric_limits<T>::infinity();
        for (T dx : {x0, x1})
        {
            T dy = std::clamp(-conic.b * dx / conic.c, y0, y1);
            best = std::min(best, q(dx, dy));
        }
        for (T dy : {y0, y1})
        {
            T dx = std::clamp(-conic.b * dy / conic.a, x0, x1);
            best = std::min(best, q(dx, dy));
        }
        return best;
    }

    template <typename T>
    TileBins tile_and_sort(std::vector<ProjectedGaussian<T>> &projected, int width, int height,
                           const RasterSettings &settings)
    {
        std::sort(projected.begin(), projected.end(), [](const ProjectedGaussian<T> &a, const ProjectedGaussian<T> &b)
                  { return a.depth < b.depth || (a.depth == b.depth && a.index < b.index); });

        TileBins bins;
        const int ts = settings.tile_size;
        bins.tile_size = ts;
        bins.tiles_x = (width + ts - 1) / ts;
        bins.tiles_y = (height + ts - 1) / ts;
        const T limit = T(settings.footprint_sigma * settings.footprint_sigma);

        // (tile, sorted position) pairs in depth order, then a stable counting sort by tile
        std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
        pairs.reserve(projected.size() * 2);
        for (std::size_t i = 0; i < projected.size(); ++i)
        {
            const auto &p = projected[i];
            // Pixel centers sit at integer + 0.5
            int c0 = std::max(0, int(std::ceil(p.mean2d.x - p.extent.x - T(0.5))));
            int c1 = std::min(width - 1, int(std::floor(p.mean2d.x + p.extent.x - T(0.5))));
            int r0 = std::max(0, int(std::ceil(p.mean2d.y - p.extent.y - T(0.5))));
            int r1 = std::min(height - 1, int(std::floor(p.mean2d.y + p.extent.y - T(0.5))));
            if (c0 > c1 || r0 > r1)
                continue;
            int tx0 = c0 / ts, tx1 = c1 / ts, ty0 = r0 / ts, ty1 = r1 / ts;
            bool exact = (tx1 > tx0) && (ty1 > ty0);
            for (int ty = ty0; ty <= ty1; ++ty)
                for (int tx = tx0; tx <= tx1; ++tx)
                {
                    if (exact)
                    {
                        T x0 = T(std::max(tx * ts, c0)) + T(0.5) - p.mean2d.x;
                        T x1 = T(std::min(tx * ts + ts - 1, c1)) + T(0.5) - p.mean2d.x;
                        T y0 = T(std::max(ty * ts, r0)) + T(0.5) - p.mean2d.y;
                        T y1 = T(std::min(ty * ts + ts - 1, r1)) + T(0.5) - p.mean2d.y;
                        if (rect_min_power(p.conic, x0, x1, y0, y1) > limit)
                            continue;
                    }
                    pairs.emplace_back(std::uint32_t(ty * bins.tiles_x + tx), std::uint32_t(i));
                }
        }

        bins.offsets.assign(std::size_t(bins.tile_count()) + 1, 0);
        for (const auto &pr : pairs)
            ++bins.offsets[pr.first + 1];
        for (int t = 0; t < bins.tile_count(); ++t)
            bins.offsets[std::size_t(t) + 1] += bins.offsets[std::size_t(t)];
        bins.entries.resize(pairs.size());
        std::vector<std::uint32_t> cursor(bins.offsets.begin(), bins.offsets.end() - 1);
        for (const auto &pr : pairs)
            bins.entries[cursor[pr.first]++] = pr.second;
        return bins;
    }

    template <typename T>
    PixelResult<T> blend_pixel(std::span<const ProjectedGaussian<T>> sorted, int row, int col,
                               const RasterSettings &settings)
    {
        PixelResult<T> out;
        const T px = T(col) + T(0.5), py = T(row) + T(0.5);
        T trans = T(1);
        for (const auto &p : sorted)
        {
            ++out.processed;
            T a = contribution_alpha(p, px, py, settings);
            if (a == T(0))
                continue;
            T w = a * trans;
            for (int ch = 0; ch < kNumChannels; ++ch)
                out.values[std::size_t(ch)] += w * p.values[std::size_t(ch)];
            trans *= (T(1) - a);
            if (trans < T(settings.t_stop))
                break;
        }
        out.transmittance = trans;
        return out;
    }

    // Blends one tile into the image
    template <typename T>
    static void blend_tile(const std::vector<ProjectedGaussian<T>> &projected, const TileBins &bins, int tile,
                           const RasterSettings &settings, Planes<T> &image, std::vector<T> &transmittance)
    {
        if (bins.tile(tile).empty())
            return;
        thread_local detail::TileWork<T> work;
        work.build(projected, bins, tile, image.width, image.height, settings);

        const T limit = T(settings.footprint_sigma * settings.footprint_sigma);
        const T min_alpha = T(settings.min_alpha), max_alpha = T(settings.max_alpha), t_stop = T(settings.t_stop);
        const std::size_t plane = image.plane_size();
        for (int r = work.row0; r < work.row1; ++r)
        {
            const T py = T(r) + T(0.5);
            const auto row = work.row(r);
            for (int c = work.col0; c < work.col1; ++c)
            {
                const int rel = c - work.col0;
                const T px = T(c) + T(0.5);
                T trans = T(1), acc0 = T(0), acc1 = T(0), acc2 = T(0);
                for (const auto &span : row)
                {
                    if (rel < span.col0 || rel > span.col1)
                        continue;
                    const auto &g = work.local[span.local];
                    T dx = px - g.mx, dy = py - g.my;
                    T q = g.ca * dx * dx + T(2) * g.cb * dx * dy + g.cc * dy * dy;
                    if (q > limit)
                        continue;
                    T a = g.alpha * std::exp(T(-0.5) * q);
                    if (a < min_alpha)
                        continue;
                    a = std::min(a, max_alpha);
                    T w = a * trans;
                    acc0 += w * g.v[0];
                    acc1 += w * g.v[1];
                    acc2 += w * g.v[2];
                    trans *= (T(1) - a);
                    if (trans < t_stop)
                        break;
                }
                std::size_t k = std::size_t(r) * image.width + c;
                image.data[k] = acc0;
                image.data[plane + k] = acc1;
                image.data[2 * plane + k] = acc2;
                transmittance[k] = trans;
            }
        }
    }

    template <typename T>
    ViewRender<T> rasterize(const BasicModel<T> &model, const PinholeCamera &cam, const RasterSettings &settings)
    {
        static_assert(kNumChannels == 3, "blend_tile is specialised for three channels");
        ViewRender<T> out;
        out.frame = CameraFrame<T>::from(cam);
        const int res = cam.resolution;
        out.image = Planes<T>(kNumChannels, res, res);
        out.transmittance.assign(std::size_t(res) * res, T(1));

        // Projection in fixed-size chunks, concatenated in chunk order
        const std::size_t n = model.gaussians.size();
        constexpr std::size_t chunk = 8192;
        const std::size_t n_chunks = (n + chunk - 1) / chunk;
        std::vector<std::vector<ProjectedGaussian<T>>> parts(n_chunks);
        parallel_for(n_chunks, [&](std::size_t ci)
                     {
                         std::size_t b = ci * chunk, e = std::min(n, b + chunk);
                         auto &part = parts[ci];
                         for (std::size_t i = b; i < e; ++i)
                             if (auto p = project(model.gaussians[i], model.sh_degree, out.frame, settings))
                             {
                                 p->index = std::uint32_t(i);
                                 part.push_back(*p);
                             } });
        std::size_t total = 0;
        for (const auto &p : parts)
            total += p.size();
        out.projected.reserve(total);
        for (auto &p : parts)
            out.projected.insert(out.projected.end(), p.begin(), p.end());

        out.bins = tile_and_sort(out.projected, res, res, settings);
        parallel_for(std::size_t(out.bins.tile_count()), [&](std::size_t t)
                     { blend_tile(out.projected, out.bins, int(t), settings, out.image, out.transmittance); });
        return out;
    }

    // --------------------------------------------------------------------------------------------
    // Panorama

    static PanoramaLayout build_layout(int height)
    {
        if (height <= 0 || height % 16 != 0)
            throw std::invalid_argument("panorama height must be a positive multiple of 16");
        PanoramaLayout layout;
        layout.height = height;
        layout.width = 2 * height;
        const int r = cube_face_resolution(height);
        layout.face_resolution = r;
        layout.samples.resize(std::size_t(layout.height) * layout.width);

        Mat3<double> cam_from_local[6];
        for (int f = 0; f < 6; ++f)
            cam_from_local[f] = cube_face_rotation(f).transposed();
        const double focal = 0.5 * r; // fov = pi / 2

        for (int row = 0; row < layout.height; ++row)
            for (int col = 0; col < layout.width; ++col)
            {
                Vec3<double> d = equirect_direction(row + 0.5, col + 0.5, layout.height, layout.width);
                int axis = 0;
                for (int a = 1; a < 3; ++a)
                    if (std::abs(d[a]) > std::abs(d[axis]))
                        axis = a;
                int face = 2 * axis + (d[axis] < 0.0 ? 1 : 0);
                Vec3<double> c = cam_from_local[face] * d;
                double u = focal * c.x / c.z + 0.5 * r - 0.5;
                double v = focal * c.y / c.z + 0.5 * r - 0.5;
                u = std::clamp(u, 0.0, double(r - 1));
                v = std::clamp(v, 0.0, double(r - 1));
                int u0 = std::min(int(std::floor(u)), r - 2), v0 = std::min(int(std::floor(v)), r - 2);
                double fu = u - u0, fv = v - v0;

                auto &s = layout.samples[std::size_t(row) * layout.width + col];
                s.face = face;
                s.pixel = {std::uint32_t(v0 * r + u0), std::uint32_t(v0 * r + u0 + 1), std::uint32_t((v0 + 1) * r + u0),
                           std::uint32_t((v0 + 1) * r + u0 + 1)};
                s.weight = {float((1 - fu) * (1 - fv)), float(fu * (1 - fv)), float((1 - fu) * fv), float(fu * fv)};
            }
        return layout;
    }

    const PanoramaLayout &PanoramaLayout::get(int height)
    {
        static std::mutex mutex;
        static std::map<int, std::unique_ptr<PanoramaLayout>> cache;
        std::lock_guard<std::mutex> lock(mutex);
        auto &slot = cache[height];
        if (!slot)
            slot = std::make_unique<PanoramaLayout>(build_layout(height));
        return *slot;
    }

    template <typename T>
    PanoramaRender<T> rasterize_panorama(const BasicModel<T> &model, const RxPose &pose, int height,
                                         const RasterSettings &settings)
    {
        const PanoramaLayout &layout = PanoramaLayout::get(height);
        PanoramaRender<T> out;
        for (int f = 0; f < 6; ++f)
        {
            out.cameras[std::size_t(f)] = cube_face_camera(pose, f, layout.face_resolution);
            out.faces[std::size_t(f)] = rasterize(model, out.cameras[std::size_t(f)], settings);
        }

        out.image = Planes<T>(kNumChannels, layout.height, layout.width);
        const std::size_t plane = out.image.plane_size();
        const std::size_t face_plane = std::size_t(layout.face_resolution) * layout.face_resolution;
        for (std::size_t k = 0; k < layout.samples.size(); ++k)
        {
            const auto &s = layout.samples[k];
            const auto &face = out.faces[std::size_t(s.face)].image.data;
            for (int ch = 0; ch < kNumChannels; ++ch)
            {
                const T *src = face.data() + std::size_t(ch) * face_plane;
                out.image.data[std::size_t(ch) * plane + k] =
                    T(s.weight[0]) * src[s.pixel[0]] + T(s.weight[1]) * src[s.pixel[1]] +
                    T(s.weight[2]) * src[s.pixel[2]] + T(s.weight[3]) * src[s.pixel[3]];
            }
        }
        return out;
    }

    template <typename T>
    RadioSpatialSpectrum to_spectrum(const Planes<T> &planes)
    {
        // Raw blends can leave a channel's range (SH values are unbounded); published spectra are clipped
        RadioSpatialSpectrum s(planes.height, planes.width, planes.channels);
        const std::size_t n = std::size_t(planes.height) * std::size_t(planes.width);
        for (std::size_t i = 0; i < planes.data.size(); ++i)
            s.data[i] = float(clip_channel(int(i / n), planes.data[i]));
        return s;
    }

    RadioSpatialSpectrum render_view(const RRFModel &model, const PinholeCamera &cam, const RasterSettings &settings)
    {
        auto r = rasterize(model, cam, settings);
        RadioSpatialSpectrum s = to_spectrum(r.image);
        s.pose = cam.pose;
        s.projection.kind = ProjectionKind::pinhole;
        s.projection.fov = cam.fov;
        s.projection.face_id = cam.face_id;
        return s;
    }

    RadioSpatialSpectrum render_panorama(const RRFModel &model, const RxPose &pose, int height,
                                         const RasterSettings &settings)
    {
        auto r = rasterize_panorama(model, pose, height, settings);
        RadioSpatialSpectrum s = to_spectrum(r.image);
        s.pose = pose;
        s.projection.kind = ProjectionKind::equirect;
        return s;
    }

#define RRF_INSTANTIATE(T)                                                                                         \
    template struct CameraFrame<T>;                                                                                \
    template std::optional<ProjectedGaussian<T>> project(const GaussianPrimitive<T> &, int, const CameraFrame<T> &, \
                                                         const RasterSettings &);                                  \
    template TileBins tile_and_sort(std::vector<ProjectedGaussian<T>> &, int, int, const RasterSettings &);       \
    template PixelResult<T> blend_pixel(std::span<const ProjectedGaussian<T>>, int, int, const RasterSettings &);  \
    template ViewRender<T> rasterize(const BasicModel<T> &, const PinholeCamera &, const RasterSettings &);        \
    template PanoramaRender<T> rasterize_panorama(const BasicModel<T> &, const RxPose &, int, const RasterSettings &); \
    template RadioSpatialSpectrum to_spectrum(const Planes<T> &);

    RRF_INSTANTIATE(float)
    RRF_INSTANTIATE(double)

#undef RRF_INSTANTIATE

} // namespace rrf
