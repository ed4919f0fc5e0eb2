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

#ifndef RRF_SPECTRUM_HPP
#define RRF_SPECTRUM_HPP

#include "rrf/math.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace rrf
{
    // Channel layout, fixed in v1
    enum Channel : int
    {
        kVisual = 0,
        kGain = 1,
        kTof = 2,
    };
    inline constexpr int kNumChannels = 3;
    inline constexpr std::array<const char *, kNumChannels> kChannelNames = {"visual", "gain", "tof_norm"};

    // Valid channel range: gain >= 0, visual and normalized ToF in [0, 1]
    template <typename T>
    constexpr T clip_channel(int channel, T v)
    {
        if (v < T(0))
            return T(0);
        return channel != kGain && v > T(1) ? T(1) : v;
    }

    // Receiver (or camera) pose. Orientation maps local coordinates to world coordinates.
    // Local panorama frame: +x is azimuth 0, +z is up.
    struct RxPose
    {
        Vec3<double> position;
        Quat<double> orientation;

        Vec3<double> to_world(const Vec3<double> &local_dir) const { return orientation.rotate(local_dir); }
        Vec3<double> to_local(const Vec3<double> &world_dir) const { return orientation.conjugate().rotate(world_dir); }

        std::array<float, 7> packed() const;
        static RxPose unpacked(const std::array<float, 7> &v);
        bool operator==(const RxPose &o) const = default;
    };

    enum class ProjectionKind : std::uint32_t
    {
        equirect = 0,
        pinhole = 1,
    };

    struct Projection
    {
        ProjectionKind kind = ProjectionKind::equirect;
        double fov = 0.0;        // Pinhole only [rad]; not stored in .rrfs files
        int face_id = -1;        // Cube face 0..5 or -1
        bool ris_incident = false; // Spectrum produced by a RIS incident query

        // Header tag: bits 0-7 kind, bits 8-15 face id + 1, bit 16 RIS incident flag
        std::uint32_t tag() const;
        static Projection from_tag(std::uint32_t tag);
    };

    // H x W x C grid of channel values over arrival directions.
    // Storage is planar: channel-major, row-major within each plane.
    struct RadioSpatialSpectrum
    {
        int height = 0, width = 0, channels = kNumChannels;
        std::vector<float> data;
        RxPose pose;
        Projection projection;

        RadioSpatialSpectrum() = default;
        RadioSpatialSpectrum(int h, int w, int c = kNumChannels);

        float &at(int c, int row, int col) { return data[(std::size_t(c) * height + row) * width + col]; }
        float at(int c, int row, int col) const { return data[(std::size_t(c) * height + row) * width + col]; }
        std::size_t plane_size() const { return std::size_t(height) * width; }

        // Unit direction in world frame through the center of pixel (row, col)
        Vec3<double> pixel_direction(int row, int col) const;

        // Angular pixel pitch [rad] along the elevation axis (equirect) or at the image center (pinhole)
        double pixel_pitch() const;
    };

    // Equirectangular mapping in the pose-local frame. Azimuth in [-pi, pi) maps to columns,
    // elevation +pi/2 is row 0.
    struct EquirectPixel
    {
        int row, col;
    };
    EquirectPixel equirect_pixel(const Vec3<double> &local_dir, int height, int width);
    Vec3<double> equirect_direction(double row_center, double col_center, int height, int width);

    // .rrfs binary IO, little-endian
    void write_spectrum(const RadioSpatialSpectrum &s, const std::string &path);
    RadioSpatialSpectrum read_spectrum(const std::string &path);

    // 8-bit grayscale PNG of one channel. Value v maps to round(255 * clamp((v - lo) / (hi - lo), 0, 1)).
    void write_channel_png(const RadioSpatialSpectrum &s, int channel, double lo, double hi, const std::string &path);

} // namespace rrf

#endif
