#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace parcel {

/// Process-wide worker count used by parallel_for; 1 means run inline.
void set_thread_count(int threads);
int thread_count();

/// Runs body(i) for i in [0, n). Work is assigned by stride so each index is
/// processed exactly once; callers write into pre-sized slots and reduce in
/// index order afterwards, which keeps results independent of the thread count.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, thread_count())), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace parcel
