#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace bdf {

/// Calls f(i) for i in [0, n) on at most `jobs` threads. f must not throw.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  const std::size_t workers = std::min<std::size_t>(n, std::size_t(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace bdf
