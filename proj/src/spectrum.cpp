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

#include "rrf/spectrum.hpp"
#include "rrf/binary_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace rrf
{
    std::array<float, 7> RxPose::packed() const
    {
        return {float(position.x), float(position.y), float(position.z), float(orientation.w),
                float(orientation.x), float(orientation.y), float(orientation.z)};
    }

    RxPose RxPose::unpacked(const std::array<float, 7> &v)
    {
        RxPose p;
        p.position = {v[0], v[1], v[2]};
        p.orientation = Quat<double>(v[3], v[4], v[5], v[6]);
        return p;
    }

    std::uint32_t Projection::tag() const
    {
        return std::uint32_t(kind) | (std::uint32_t(face_id + 1) << 8) | (ris_incident ? (1u << 16) : 0u);
    }

    Projection Projection::from_tag(std::uint32_t tag)
    {
        Projection p;
        std::uint32_t kind = tag & 0xffu;
        if (kind > 1u || (tag >> 17) != 0u)
            throw std::runtime_error("unknown projection tag " + std::to_string(tag));
        p.kind = ProjectionKind(kind);
        p.face_id = int((tag >> 8) & 0xffu) - 1;
        p.ris_incident = (tag >> 16) & 1u;
        return p;
    }

    RadioSpatialSpectrum::RadioSpatialSpectrum(int h, int w, int c)
        : height(h), width(w), channels(c), data(std::size_t(h) * w * c, 0.0f)
    {
    }

    Vec3<double> RadioSpatialSpectrum::pixel_direction(int row, int col) const
    {
        if (projection.kind == ProjectionKind::equirect)
            return pose.to_world(equirect_direction(row + 0.5, col + 0.5, height, width));

        double f = 0.5 * width / std::tan(0.5 * projection.fov);
        Vec3<double> cam{(col + 0.5 - 0.5 * width) / f, (row + 0.5 - 0.5 * height) / f, 1.0};
        return normalized(pose.to_world(cam));
    }

    double RadioSpatialSpectrum::pixel_pitch() const
    {
        if (projection.kind == ProjectionKind::equirect)
            return kPi / height;
        return 2.0 * std::tan(0.5 * projection.fov) / width;
    }

    EquirectPixel equirect_pixel(const Vec3<double> &d, int height, int width)
    {
        double az = std::atan2(d.y, d.x);
        double el = std::asin(std::clamp(d.z / norm(d), -1.0, 1.0));
        double d_az = 2.0 * kPi / width, d_el = kPi / height;
        int col = int(std::floor((az + kPi) / d_az));
        int row = int(std::floor((0.5 * kPi - el) / d_el));
        col = ((col % width) + width) % width;
        row = std::clamp(row, 0, height - 1);
        return {row, col};
    }

    Vec3<double> equirect_direction(double row_center, double col_center, int height, int width)
    {
        double az = -kPi + col_center * (2.0 * kPi / width);
        double el = 0.5 * kPi - row_center * (kPi / height);
        double ce = std::cos(el);
        return {ce * std::cos(az), ce * std::sin(az), std::sin(el)};
    }

    // --------------------------------------------------------------------------------------------

    static constexpr char kSpectrumMagic[4] = {'R', 'R', 'F', 'S'};
    static constexpr std::uint32_t kSpectrumVersion = 1;

    void write_spectrum(const RadioSpatialSpectrum &s, const std::string &path)
    {
        if (s.data.size() != s.plane_size() * std::size_t(s.channels))
            throw std::invalid_argument("spectrum data size does not match its shape");
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write spectrum file '" + path + "'");
        out.write(kSpectrumMagic, 4);
        write_le<std::uint32_t>(out, kSpectrumVersion);
        write_le<std::uint32_t>(out, std::uint32_t(s.height));
        write_le<std::uint32_t>(out, std::uint32_t(s.width));
        write_le<std::uint32_t>(out, std::uint32_t(s.channels));
        write_le<std::uint32_t>(out, s.projection.tag());
        for (float v : s.pose.packed())
            write_le<float>(out, v);
        write_le_array<float>(out, s.data);
        if (!out)
            throw std::runtime_error("write failed for '" + path + "'");
    }

    RadioSpatialSpectrum read_spectrum(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw std::runtime_error("cannot open spectrum file '" + path + "'");
        char magic[4];
        in.read(magic, 4);
        if (!in || !std::equal(magic, magic + 4, kSpectrumMagic))
            throw std::runtime_error("'" + path + "' is not an RRFS file");
        if (read_le<std::uint32_t>(in) != kSpectrumVersion)
            throw std::runtime_error("'" + path + "': unsupported RRFS version");
        std::uint32_t h = read_le<std::uint32_t>(in), w = read_le<std::uint32_t>(in), c = read_le<std::uint32_t>(in);
        if (h == 0 || w == 0 || c == 0 || h > 65536 || w > 65536 || c > 64)
            throw std::runtime_error("'" + path + "': implausible spectrum shape");
        RadioSpatialSpectrum s{int(h), int(w), int(c)};
        s.projection = Projection::from_tag(read_le<std::uint32_t>(in));
        std::array<float, 7> pose;
        for (float &v : pose)
            v = read_le<float>(in);
        s.pose = RxPose::unpacked(pose);
        read_le_array<float>(in, s.data);
        if (!in)
            throw std::runtime_error("'" + path + "': truncated RRFS file");
        return s;
    }

    void write_channel_png(const RadioSpatialSpectrum &s, int channel, double lo, double hi, const std::string &path)
    {
        if (channel < 0 || channel >= s.channels)
            throw std::invalid_argument("channel index out of range");
        if (!(hi > lo))
            throw std::invalid_argument("png range must satisfy hi > lo");

        std::unique_ptr<FILE, int (*)(FILE *)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
        if (!fp)
            throw std::runtime_error("cannot write png '" + path + "'");

        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        png_infop info = png ? png_create_info_struct(png) : nullptr;
        if (!png || !info)
        {
            png_destroy_write_struct(&png, &info);
            throw std::runtime_error("libpng initialization failed");
        }
        std::vector<unsigned char> row(std::size_t(s.width));
        if (setjmp(png_jmpbuf(png)))
        {
            png_destroy_write_struct(&png, &info);
            throw std::runtime_error("libpng error while writing '" + path + "'");
        }
        png_init_io(png, fp.get());
        png_set_IHDR(png, info, png_uint_32(s.width), png_uint_32(s.height), 8, PNG_COLOR_TYPE_GRAY,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        for (int r = 0; r < s.height; ++r)
        {
            for (int c = 0; c < s.width; ++c)
            {
                double t = std::clamp((double(s.at(channel, r, c)) - lo) / (hi - lo), 0.0, 1.0);
                row[std::size_t(c)] = (unsigned char)std::lround(255.0 * t);
            }
            png_write_row(png, row.data());
        }
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
    }

} // namespace rrf
