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

#ifndef RRF_TILE_ROWS_HPP
#define RRF_TILE_ROWS_HPP

#include "rrf/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

// Per-tile working set shared by the forward blend and its adjoint. For every pixel row of the tile it
// lists, in depth order, the Gaussians whose footprint may reach that row together with a conservative
// column span. The per-pixel footprint test itself is unchanged, so the composited sequence is identical
// to scanning the full tile list.

namespace rrf::detail
{
    template <typename T>
    struct LocalGaussian
    {
        T mx, my, ca, cb, cc, alpha;
        T v[kNumChannels];
    };

    struct RowSpan
    {
        std::uint32_t local;
        std::int16_t col0, col1; // Inclusive, tile-relative
    };

    template <typename T>
    struct TileWork
    {
        int row0 = 0, row1 = 0, col0 = 0, col1 = 0;
        std::vector<LocalGaussian<T>> local;
        std::vector<std::uint32_t> row_offsets; // rows + 1
        std::vector<RowSpan> spans;

        void build(const std::vector<ProjectedGaussian<T>> &projected, const TileBins &bins, int tile, int width,
                   int height, const RasterSettings &settings)
        {
            auto list = bins.tile(tile);
            const int ts = bins.tile_size;
            const int tx = tile % bins.tiles_x, ty = tile / bins.tiles_x;
            col0 = tx * ts;
            row0 = ty * ts;
            col1 = std::min(col0 + ts, width);
            row1 = std::min(row0 + ts, height);
            const int rows = row1 - row0;

            local.clear();
            local.reserve(list.size());
            for (std::uint32_t e : list)
            {
                const auto &p = projected[e];
                local.push_back({p.mean2d.x, p.mean2d.y, p.conic.a, p.conic.b, p.conic.c, p.alpha,
                                 {p.values[0], p.values[1], p.values[2]}});
            }

            // Two passes: count, then fill, keeping depth order within each row
            // Slightly inflated so float rounding in the per-pixel test can never fall outside a span
            const double limit = settings.footprint_sigma * settings.footprint_sigma * (1.0 + 1e-4);
            std::vector<std::uint32_t> counts(std::size_t(rows) + 1, 0);
            struct Range
            {
                int r0, r1;
            };
            std::vector<Range> ranges(list.size());
            for (std::size_t j = 0; j < list.size(); ++j)
            {
                const auto &p = projected[list[j]];
                int r0 = std::max(row0, int(std::floor(double(p.mean2d.y) - double(p.extent.y) - 0.5)));
                int r1 = std::min(row1 - 1, int(std::ceil(double(p.mean2d.y) + double(p.extent.y) - 0.5)));
                ranges[j] = {r0, r1};
                for (int r = r0; r <= r1; ++r)
                    ++counts[std::size_t(r - row0) + 1];
            }
            row_offsets.assign(std::size_t(rows) + 1, 0);
            for (int r = 0; r < rows; ++r)
                row_offsets[std::size_t(r) + 1] = row_offsets[std::size_t(r)] + counts[std::size_t(r) + 1];
            spans.assign(row_offsets.back(), RowSpan{0, 1, 0});
            std::vector<std::uint32_t> cursor(row_offsets.begin(), row_offsets.end() - 1);

            for (std::size_t j = 0; j < list.size(); ++j)
            {
                const auto &g = local[j];
                const double a = double(g.ca), b = double(g.cb), c = double(g.cc);
                for (int r = ranges[j].r0; r <= ranges[j].r1; ++r)
                {
                    const double dy = double(r) + 0.5 - double(g.my);
                    const double disc = b * b * dy * dy - a * (c * dy * dy - limit);
                    RowSpan span{std::uint32_t(j), 1, 0}; // Empty unless the row meets the ellipse
                    if (disc >= 0.0)
                    {
                        const double root = std::sqrt(disc);
                        const double lo = double(g.mx) + (-b * dy - root) / a - 0.5;
                        const double hi = double(g.mx) + (-b * dy + root) / a - 0.5;
                        // One pixel of slack on both sides covers rounding in the float footprint test
                        int c0 = std::max(col0, int(std::ceil(lo)) - 1);
                        int c1 = std::min(col1 - 1, int(std::floor(hi)) + 1);
                        if (c0 <= c1)
                            span = {std::uint32_t(j), std::int16_t(c0 - col0), std::int16_t(c1 - col0)};
                    }
                    spans[cursor[std::size_t(r - row0)]++] = span;
                }
            }
        }

        std::span<const RowSpan> row(int r) const
        {
            const std::size_t i = std::size_t(r - row0);
            return {spans.data() + row_offsets[i], row_offsets[i + 1] - row_offsets[i]};
        }
    };

} // namespace rrf::detail

#endif
