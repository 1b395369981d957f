#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace clustersim {

/// Worker threads to use: CLUSTER_SIM_THREADS if set and positive, else the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Calls body(i) for i in [0, n) on up to worker_count() threads. Indices are
/// handed out in fixed-size blocks; each index is processed exactly once, so
/// results written to per-index slots do not depend on the thread count.
/// The first exception thrown by any body is rethrown on the caller.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(1, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  constexpr std::size_t kBlock = 64;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    try {
      for (;;) {
        const std::size_t start = next.fetch_add(kBlock);
        if (start >= n) return;
        const std::size_t stop = std::min(n, start + kBlock);
        for (std::size_t i = start; i < stop; ++i) body(i);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(n);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace clustersim
