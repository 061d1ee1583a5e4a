// Copyright 2026 The slicekit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace slicekit {

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Callers write
/// results into per-index slots, so the outcome is independent of scheduling.
template <typename Body>
void parallel_for(std::uint64_t count, unsigned jobs, Body body) {
    jobs = std::max(1u, jobs);
    if (jobs == 1 || count < 2) {
        for (std::uint64_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::uint64_t i = next.fetch_add(1);
                if (i >= count) {
                    return;
                }
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) {
                        error = std::current_exception();
                    }
                    next = count;
                    return;
                }
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

}  // namespace slicekit
