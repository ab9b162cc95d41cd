#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace pwbf {

// Number of worker threads used by the parallel kernels. 0 means
// hardware_concurrency. Results never depend on this value: every kernel
// writes disjoint outputs with a fixed per-output summation order.
inline unsigned &thread_count() {
  static unsigned n = 1;
  return n;
}

inline void set_threads(unsigned n) { thread_count() = n; }

template <typename Fn> void parallel_for(std::size_t n, Fn &&fn) {
  unsigned workers = thread_count();
  if (workers == 0) {
    workers = std::max(1U, std::thread::hardware_concurrency());
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&fn, n, w, workers] {
      for (std::size_t i = w; i < n; i += workers) {
        fn(i);
      }
    });
  }
}

} // namespace pwbf
