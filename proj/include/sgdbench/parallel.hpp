#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace sgdbench {

inline unsigned default_workers() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs fn(begin, end) over contiguous chunks of [0, n), one chunk per worker.
// The calling thread takes the first chunk. Callers must only use this for
// work with disjoint writes; the chunking must not influence results.
inline void parallel_for_blocks(std::size_t n, unsigned workers,
                                const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t w = workers == 0 ? 1 : workers;
  if (w > n) w = n;
  if (w == 1) {
    fn(0, n);
    return;
  }
  std::size_t chunk = (n + w - 1) / w;
  std::vector<std::thread> threads;
  threads.reserve(w - 1);
  for (std::size_t i = 1; i < w; ++i) {
    std::size_t b = i * chunk;
    std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    threads.emplace_back(fn, b, e);
  }
  fn(0, std::min(n, chunk));
  for (auto& t : threads) t.join();
}

}  // namespace sgdbench
