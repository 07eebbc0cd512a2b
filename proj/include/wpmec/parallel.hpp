#pragma once
#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace wpmec::detail {

/// Runs fn(0..n-1) across up to `jobs` worker threads (0 = hardware
/// concurrency). The first exception thrown by any worker is rethrown after
/// all workers join.
inline void parallel_for(long n, int jobs,
                         const std::function<void(long)>& fn) {
  if (n <= 0) return;
  unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs)
                              : std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  if (workers > static_cast<unsigned>(n)) workers = static_cast<unsigned>(n);
  if (workers == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<long> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        long i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace wpmec::detail
