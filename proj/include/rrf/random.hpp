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

#ifndef RRF_RANDOM_HPP
#define RRF_RANDOM_HPP

#include <cstdint>
#include <random>

namespace rrf
{
    // Seeded generator with distribution code that does not depend on the standard library vendor,
    // so datasets and models are reproducible across toolchains.
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed) : engine_(seed) {}

        std::uint64_t next() { return engine_(); }

        // Uniform in [0, 1)
        double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
        double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

        // Uniform integer in [0, n)
        std::uint64_t below(std::uint64_t n) { return std::uint64_t(uniform() * double(n)) % n; }

    private:
        std::mt19937_64 engine_;
    };

} // namespace rrf

#endif
