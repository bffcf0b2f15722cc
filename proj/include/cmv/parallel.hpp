#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace cmv {

/// Calls fn(i) for i in [0, count) on up to `workers` threads and returns the
/// results in index order. The first exception thrown by fn is rethrown.
template <class Fn>
auto parallel_map(std::size_t count, unsigned workers, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<R> out(count);
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (n <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          out[i] = fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

/// Worker count from the environment variable, else hardware concurrency.
unsigned default_workers(const char* env_var = "CMV_WORKERS");

}  // namespace cmv
