#pragma once

// Minimal worker pool for embarrassingly parallel scans. Tasks are indexed;
// results are written by index, so the output order never depends on
// scheduling.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace movingbox {

/// Worker count: MOVINGBOX_THREADS if set, else hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("MOVINGBOX_THREADS")) {
    const long v = std::atol(env);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

/// Runs fn(i) for i in [0, count) on `threads` workers (0 = worker_count()).
/// The first exception thrown by any task is rethrown after all workers join.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                         unsigned threads = 0) {
  if (threads == 0) threads = worker_count();
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n_threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  pool.reserve(n_threads);
  for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace movingbox
