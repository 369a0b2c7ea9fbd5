#include "mansel/core/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace mansel {

void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
  const size_t hw = std::thread::hardware_concurrency();
  const size_t workers = std::min<size_t>(hw == 0 ? 1 : hw, n);
  if (workers <= 1 || n < 4) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace mansel
