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

#ifndef RRF_PARALLEL_HPP
#define RRF_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace rrf
{
    // Worker count: RRF_NUM_THREADS if set, otherwise the hardware concurrency
    int default_thread_count();

    // Overrides the worker count for subsequent calls (0 restores the default)
    void set_thread_count(int n);
    int thread_count();

    // Runs body(i) for i in [0, n) on up to thread_count() workers using dynamic chunking.
    // Callers must not depend on execution order; each index is processed exactly once.
    void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body, std::size_t grain = 1);

} // namespace rrf

#endif
