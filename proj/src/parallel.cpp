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

#include "rrf/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace rrf
{
    static std::atomic<int> g_thread_override{0};

    int default_thread_count()
    {
        if (const char *env = std::getenv("RRF_NUM_THREADS"))
        {
            try
            {
                int n = std::stoi(env);
                if (n > 0)
                    return n;
            }
            catch (const std::exception &)
            {
            }
        }
        return std::max(1u, std::thread::hardware_concurrency());
    }

    void set_thread_count(int n) { g_thread_override = std::max(0, n); }

    int thread_count()
    {
        int n = g_thread_override.load();
        return n > 0 ? n : default_thread_count();
    }

    void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body, std::size_t grain)
    {
        if (n == 0)
            return;
        grain = std::max<std::size_t>(grain, 1);
        std::size_t workers = std::min<std::size_t>(std::size_t(thread_count()), (n + grain - 1) / grain);
        if (workers <= 1)
        {
            for (std::size_t i = 0; i < n; ++i)
                body(i);
            return;
        }

        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto run = [&]()
        {
            try
            {
                for (;;)
                {
                    std::size_t begin = next.fetch_add(grain);
                    if (begin >= n)
                        break;
                    std::size_t end = std::min(n, begin + grain);
                    for (std::size_t i = begin; i < end; ++i)
                        body(i);
                }
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next = n;
            }
        };

        std::vector<std::thread> pool;
        pool.reserve(workers - 1);
        for (std::size_t t = 1; t < workers; ++t)
            pool.emplace_back(run);
        run();
        for (auto &t : pool)
            t.join();
        if (error)
            std::rethrow_exception(error);
    }

} // namespace rrf
