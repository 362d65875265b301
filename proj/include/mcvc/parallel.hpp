#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace mcvc {

// Runs fn(i) for i in [0, count) on up to `threads` workers, item i going to
// worker i % threads. Results must not depend on the schedule: each call
// writes only its own outputs.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  const auto workers =
      static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < count; i += workers) fn(i);
    });
  }
}

}  // namespace mcvc
