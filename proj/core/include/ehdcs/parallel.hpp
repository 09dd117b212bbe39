#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ehdcs {

// Default worker count: EHDCS_WORKERS if set, else hardware concurrency.
int default_workers();

// Runs body(i) for i in [0, count) on `workers` threads. Work is handed out
// by an atomic counter; callers write results into per-index slots so the
// reduction never depends on scheduling. The first exception is rethrown.
template <class Body>
void parallel_for(long long count, int workers, Body&& body) {
  workers = std::max(1, workers);
  if (workers == 1 || count <= 1) {
    for (long long i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<long long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const long long i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  const int spawn = static_cast<int>(std::min<long long>(workers, count));
  pool.reserve(static_cast<std::size_t>(spawn));
  for (int w = 0; w < spawn; ++w) pool.emplace_back(worker);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace ehdcs
