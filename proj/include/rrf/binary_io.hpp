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

#ifndef RRF_BINARY_IO_HPP
#define RRF_BINARY_IO_HPP

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <type_traits>

namespace rrf
{
    template <typename T>
    inline T byteswap_value(T v)
    {
        static_assert(std::is_trivially_copyable_v<T>);
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        std::reverse(b, b + sizeof(T));
        std::memcpy(&v, b, sizeof(T));
        return v;
    }

    template <typename T>
    inline void write_le(std::ostream &out, T v)
    {
        if constexpr (std::endian::native == std::endian::big)
            v = byteswap_value(v);
        out.write(reinterpret_cast<const char *>(&v), sizeof(T));
    }

    template <typename T>
    inline T read_le(std::istream &in)
    {
        T v{};
        in.read(reinterpret_cast<char *>(&v), sizeof(T));
        if constexpr (std::endian::native == std::endian::big)
            v = byteswap_value(v);
        return v;
    }

    template <typename T>
    inline void write_le_array(std::ostream &out, std::span<const T> values)
    {
        if constexpr (std::endian::native == std::endian::little)
            out.write(reinterpret_cast<const char *>(values.data()), std::streamsize(values.size_bytes()));
        else
            for (T v : values)
                write_le<T>(out, v);
    }

    template <typename T>
    inline void read_le_array(std::istream &in, std::span<T> values)
    {
        if constexpr (std::endian::native == std::endian::little)
            in.read(reinterpret_cast<char *>(values.data()), std::streamsize(values.size_bytes()));
        else
            for (T &v : values)
                v = read_le<T>(in);
    }

} // namespace rrf

#endif
