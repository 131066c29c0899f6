#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace limper {

/// Thread count: LIMPER_THREADS wins over `requested`; 0 means hardware.
inline int resolve_threads(int requested) {
  if (const char* env = std::getenv("LIMPER_THREADS")) {
    try {
      requested = std::stoi(env);
    } catch (const std::exception&) {
    }
  }
  if (requested <= 0) requested = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(requested, 1);
}

/// Calls body(i) for i in [0, n).  Each index is handled exactly once and
/// callers write results to slot i, so output never depends on scheduling.
template <class Body>
void parallel_for(std::size_t n, int threads, Body body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace limper
