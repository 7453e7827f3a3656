/*
 * Copyright 2026 The Regolith Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace regolith {

namespace detail {
inline std::atomic<int>& worker_threads_slot() {
  static std::atomic<int> value{0};  // 0 = hardware concurrency
  return value;
}
}  // namespace detail

/// Worker threads used by the simulators. 0 restores the default
/// (hardware concurrency). Outputs never depend on this setting; work is
/// seeded per item, not per thread.
inline void set_worker_threads(int workers) {
  detail::worker_threads_slot().store(workers < 0 ? 0 : workers);
}

inline int worker_threads() {
  const int configured = detail::worker_threads_slot().load();
  if (configured > 0) return configured;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(index) for every index in [begin, end), split into contiguous
/// chunks across the configured workers. fn must write only to its own
/// index's outputs. The first exception thrown by any worker is rethrown.
template <typename Fn>
void parallel_for(std::size_t begin, std::size_t end, Fn&& fn) {
  const std::size_t count = end > begin ? end - begin : 0;
  const int workers =
      static_cast<int>(std::min<std::size_t>(worker_threads(), count));
  if (count == 0) return;
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
    return;
  }

  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto run_chunk = [&](std::size_t lo, std::size_t hi) {
    try {
      for (std::size_t i = lo; i < hi && !failed.load(std::memory_order_relaxed); ++i)
        fn(i);
    } catch (...) {
      if (!failed.exchange(true)) error = std::current_exception();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (int w = 1; w < workers; ++w) {
    const std::size_t lo = begin + chunk * w;
    const std::size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(run_chunk, lo, hi);
  }
  run_chunk(begin, std::min(end, begin + chunk));
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace regolith
