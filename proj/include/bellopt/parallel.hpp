#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace bellopt {

/// Worker count: hardware concurrency, capped by BELLOPT_THREADS when set.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BELLOPT_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min(n, static_cast<unsigned>(std::min(cap, 1024L)));
    } catch (const std::exception&) {
      // ignore malformed values
    }
  }
  return n;
}

/// Runs fn(i) for i in [0, count) on up to `max_workers` threads
/// (worker_count() when 0). Results must be written to per-index slots by
/// the caller. The first exception thrown by any task is rethrown after all
/// workers finish.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn, unsigned max_workers = 0) {
  const unsigned wanted = max_workers > 0 ? max_workers : worker_count();
  const auto workers =
      static_cast<unsigned>(std::min<std::size_t>(wanted, std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace bellopt
