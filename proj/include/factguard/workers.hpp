#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace factguard {

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Items are
/// claimed in index order; once *cancel is set no new item is started.
/// Returns the number of items that ran. The first exception thrown by fn is
/// rethrown after all threads have joined.
inline std::size_t parallel_for(std::size_t count, std::size_t workers,
                                const std::function<void(std::size_t)>& fn,
                                const std::atomic<bool>* cancel = nullptr) {
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> ran{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto loop = [&] {
    for (;;) {
      if (failed.load() || (cancel != nullptr && cancel->load())) return;
      const auto i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
        ran.fetch_add(1);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  const auto n = std::max<std::size_t>(1, std::min(workers, count));
  if (n == 1) {
    loop();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n);
    for (std::size_t t = 0; t < n; ++t) threads.emplace_back(loop);
    for (auto& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);
  return ran.load();
}

}  // namespace factguard
