#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace embedcap {

// Worker count: the explicit request (or the hardware default), capped by
// the EMBEDCAP_THREADS environment variable when it is set.
inline int resolve_threads(int requested) {
  int v = requested;
  if (v <= 0) {
    unsigned hc = std::thread::hardware_concurrency();
    v = hc == 0 ? 1 : static_cast<int>(std::min<unsigned>(hc, 8));
  }
  if (const char* env = std::getenv("EMBEDCAP_THREADS")) {
    int cap = std::atoi(env);
    if (cap > 0) v = std::min(v, cap);
  }
  return v;
}

// Runs fn(i) for i in [0, count). Results must be written to preallocated
// per-index slots so the outcome is independent of scheduling.
inline void parallel_for(std::int64_t count, int threads,
                         const std::function<void(std::int64_t)>& fn) {
  threads = resolve_threads(threads);
  if (threads <= 1 || count <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const int workers = static_cast<int>(std::min<std::int64_t>(threads, count));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::int64_t i = w; i < count; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace embedcap
