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

#ifndef RRF_RASTERIZER_HPP
#define RRF_RASTERIZER_HPP

#include "rrf/camera.hpp"
#include "rrf/model.hpp"
#include "rrf/spectrum.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

// Tile-based splatting rasterizer.
//
//   project       world Gaussian -> screen-space ellipse, depth, density and SH-evaluated channel values
//   tile_and_sort 16x16 px tiles, each holding the Gaussians whose 3 sigma ellipse overlaps it, nearest first
//   blend_pixel   front-to-back alpha compositing with saturation early exit
//
// The per-pixel compositing order is fixed by the depth sort (ties broken by primitive index), so results
// do not depend on how tiles are scheduled across threads.

namespace rrf
{
    struct RasterSettings
    {
        double cov2d_floor = 0.3;          // Added to the screen covariance diagonal [px^2]
        double min_alpha = 1.0 / 255.0;    // Contributions below this are skipped
        double max_alpha = 0.999;          // Per-contribution clamp
        double t_stop = 1e-4;              // Compositing stops once transmittance falls below this
        double footprint_sigma = 3.0;      // Ellipse extent used for tiling and blending
        int tile_size = 16;
    };

    template <typename T>
    struct Planes
    {
        int channels = 0, height = 0, width = 0;
        std::vector<T> data;

        Planes() = default;
        Planes(int c, int h, int w) : channels(c), height(h), width(w), data(std::size_t(c) * h * w, T(0)) {}

        T &at(int c, int row, int col) { return data[(std::size_t(c) * height + row) * width + col]; }
        T at(int c, int row, int col) const { return data[(std::size_t(c) * height + row) * width + col]; }
        std::size_t plane_size() const { return std::size_t(height) * width; }
    };

    // Camera quantities in the pipeline's scalar type
    template <typename T>
    struct CameraFrame
    {
        Mat3<T> world_to_cam;
        Vec3<T> origin;
        T focal = T(0), cx = T(0), cy = T(0), tan_half_fov = T(0);
        int resolution = 0;
        T near_plane = T(0), far_plane = T(0);

        static CameraFrame from(const PinholeCamera &cam);
    };

    template <typename T>
    struct ProjectedGaussian
    {
        Vec2<T> mean2d;   // [px], pixel (row, col) has its center at (col + 0.5, row + 0.5)
        Sym2<T> cov2d;    // Including the anti-aliasing floor [px^2]
        Sym2<T> conic;    // Inverse of cov2d
        T depth = T(0);   // Camera-frame z [m]
        T alpha = T(0);   // Density after the mass-preserving floor rescale
        std::array<T, kNumChannels> values{};
        Vec2<T> extent;   // Half-widths of the footprint's bounding box [px]
        std::uint32_t index = 0; // Primitive index in the model
    };

    // Returns std::nullopt when the primitive is culled
    template <typename T>
    std::optional<ProjectedGaussian<T>> project(const GaussianPrimitive<T> &g, int sh_degree, const CameraFrame<T> &cam,
                                                const RasterSettings &settings = {});

    struct TileBins
    {
        int tile_size = 16;
        int tiles_x = 0, tiles_y = 0;
        std::vector<std::uint32_t> offsets; // tiles_x * tiles_y + 1 entries
        std::vector<std::uint32_t> entries; // Positions in the sorted projected list

        int tile_count() const { return tiles_x * tiles_y; }
        std::span<const std::uint32_t> tile(int t) const
        {
            return {entries.data() + offsets[std::size_t(t)], offsets[std::size_t(t) + 1] - offsets[std::size_t(t)]};
        }
    };

    // Sorts "projected" in place by (depth, primitive index) and bins it into tiles.
    // A Gaussian is listed in every tile whose pixel-center rectangle meets its footprint ellipse.
    template <typename T>
    TileBins tile_and_sort(std::vector<ProjectedGaussian<T>> &projected, int width, int height,
                           const RasterSettings &settings = {});

    template <typename T>
    struct PixelResult
    {
        std::array<T, kNumChannels> values{};
        T transmittance = T(1);
        int processed = 0; // List entries visited before stopping
    };

    // Front-to-back compositing of a depth-sorted list at the center of pixel (row, col)
    template <typename T>
    PixelResult<T> blend_pixel(std::span<const ProjectedGaussian<T>> sorted, int row, int col,
                               const RasterSettings &settings = {});

    // Per-contribution density at a pixel; returns 0 if the contribution is skipped
    template <typename T>
    inline T contribution_alpha(const ProjectedGaussian<T> &p, T px, T py, const RasterSettings &s, T *power = nullptr)
    {
        T dx = px - p.mean2d.x, dy = py - p.mean2d.y;
        T q = p.conic.a * dx * dx + T(2) * p.conic.b * dx * dy + p.conic.c * dy * dy;
        if (power)
            *power = q;
        if (q > T(s.footprint_sigma * s.footprint_sigma))
            return T(0);
        T a = p.alpha * std::exp(T(-0.5) * q);
        if (a < T(s.min_alpha))
            return T(0);
        return std::min(a, T(s.max_alpha));
    }

    // Everything the backward pass needs from a forward render
    template <typename T>
    struct ViewRender
    {
        Planes<T> image;                          // channels x R x R
        std::vector<T> transmittance;             // Final T per pixel
        std::vector<ProjectedGaussian<T>> projected; // Sorted by depth
        TileBins bins;
        CameraFrame<T> frame;
    };

    template <typename T>
    ViewRender<T> rasterize(const BasicModel<T> &model, const PinholeCamera &cam, const RasterSettings &settings = {});

    // Precomputed bilinear lookup from an equirect panorama into six cube faces
    struct PanoramaLayout
    {
        struct Sample
        {
            int face;
            std::array<std::uint32_t, 4> pixel; // Face pixel indices (row * R + col)
            std::array<float, 4> weight;
        };
        int height = 0, width = 0, face_resolution = 0;
        std::vector<Sample> samples; // height * width, row-major

        static const PanoramaLayout &get(int height);
    };

    template <typename T>
    struct PanoramaRender
    {
        Planes<T> image; // channels x H x 2H
        std::array<ViewRender<T>, 6> faces;
        std::array<PinholeCamera, 6> cameras;
    };

    template <typename T>
    PanoramaRender<T> rasterize_panorama(const BasicModel<T> &model, const RxPose &pose, int height,
                                         const RasterSettings &settings = {});

    // Public rendering entry points on the float model
    RadioSpatialSpectrum render_view(const RRFModel &model, const PinholeCamera &cam, const RasterSettings &settings = {});
    RadioSpatialSpectrum render_panorama(const RRFModel &model, const RxPose &pose, int height,
                                         const RasterSettings &settings = {});

    template <typename T>
    RadioSpatialSpectrum to_spectrum(const Planes<T> &planes);

} // namespace rrf

#endif
