#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace mfddm {

/// Resolves a user thread request; 0 means hardware parallelism.
inline std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  const auto hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Splits [0, count) into contiguous blocks, one per thread, and calls
/// fn(begin, end) for each. Block boundaries depend only on count and
/// threads, so results that are written per index are deterministic.
template <typename Fn>
void parallel_blocks(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads <= 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(threads - 1);
  const std::size_t chunk = (count + threads - 1) / threads;
  for (std::size_t t = 1; t < threads; ++t) {
    const std::size_t begin = std::min(count, t * chunk);
    const std::size_t end = std::min(count, begin + chunk);
    workers.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  fn(std::size_t{0}, std::min(count, chunk));
}

}  // namespace mfddm
