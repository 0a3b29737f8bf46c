#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace collider {

/// Runs body(i) for i in [0, count) on up to `threads` workers with a static
/// block partition. Bodies must write only to slot i of their outputs, which
/// makes results independent of the worker count. The first exception thrown
/// (lowest index among those observed) is rethrown after all workers join.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::mutex mu;
  std::exception_ptr first;
  std::size_t first_index = count;
  std::vector<std::thread> workers;
  const std::size_t block = (count + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = t * block;
    const std::size_t hi = std::min(count, lo + block);
    if (lo >= hi) break;
    workers.emplace_back([&, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (i < first_index) {
            first_index = i;
            first = std::current_exception();
          }
          return;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (first) std::rethrow_exception(first);
}

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace collider
