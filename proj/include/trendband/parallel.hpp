#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace trendband {

// Process-wide worker cap, overridable (tests use it to verify that results
// do not depend on the thread count). 0 means hardware concurrency.
inline std::atomic<unsigned>& max_threads() {
  static std::atomic<unsigned> value{0};
  return value;
}

namespace detail {
inline thread_local bool inside_parallel_region = false;
}

// Static-partition parallel loop: body(i) for i in [0, n). Each index is
// visited exactly once by exactly one worker, so bodies that write only to
// slot i are deterministic for any worker count. Nested calls run serially.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  unsigned hw = max_threads().load();
  if (hw == 0) hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  std::size_t workers = std::min<std::size_t>(hw, n);
  if (workers <= 1 || detail::inside_parallel_region) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      detail::inside_parallel_region = true;
      const std::size_t begin = n * w / workers;
      const std::size_t end = n * (w + 1) / workers;
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace trendband
