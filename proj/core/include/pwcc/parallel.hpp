#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace pwcc {

// Worker cap from PWCC_THREADS (0 or unset = hardware concurrency).
int worker_count();

// Keeps freed large blocks in the heap instead of returning them to the OS.
// Training allocates the same multi-megabyte activations every step, and
// without this the page faults cost about as much as the arithmetic. Safe
// to call repeatedly; a no-op outside glibc.
void retain_heap_memory();

// Calls fn(i) for i in [0, n), splitting the range into contiguous chunks
// across at most worker_count() threads. fn must only write state owned by
// index i. The first exception thrown by any chunk is rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(worker_count()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(n, lo + chunk);
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace pwcc
