#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gseo {

/// Runs fn(i) for i in [0, n) on at most `cap` threads. Results must be written
/// by index so the outcome does not depend on completion order. If any call
/// throws, the exception from the lowest index is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t n, int cap, Fn&& fn) {
  if (n == 0) return;
  const auto workers = static_cast<std::size_t>(std::clamp<long>(cap, 1, static_cast<long>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = n;
  std::exception_ptr error;

  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };

  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace gseo
