// Copyright 2026 The panofuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PANOFUSE_PARALLEL_HPP_
#define PANOFUSE_PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace panofuse
{

namespace detail
{
inline std::atomic<unsigned> & thread_setting()
{
  static std::atomic<unsigned> threads{1};
  return threads;
}
}  // namespace detail

// 0 selects hardware concurrency.
inline void set_num_threads(unsigned n)
{
  if (n == 0) {
    n = std::max(1u, std::thread::hardware_concurrency());
  }
  detail::thread_setting() = n;
}

inline unsigned num_threads() { return detail::thread_setting(); }

// Runs fn(i) for i in [0, count) over contiguous chunks. Callers must write
// results into per-index slots so the output is independent of scheduling.
template <typename Fn>
void parallel_for(std::size_t count, Fn && fn)
{
  const std::size_t workers = std::min<std::size_t>(num_threads(), count / 256 + 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) {
          fn(i);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
      }
    });
  }
  for (auto & t : pool) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

}  // namespace panofuse

#endif  // PANOFUSE_PARALLEL_HPP_
