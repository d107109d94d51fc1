// Block-parallel helper. Work is split into fixed blocks whose content does
// not depend on the worker count, so callers can merge per-block results in
// block order and get identical floating-point output at any thread count.
// ISOMER_THREADS caps the worker pool.
#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace isomer {

inline int thread_budget() {
  static int budget = [] {
    int n = int(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("ISOMER_THREADS")) {
      int cap = std::atoi(env);
      if (cap >= 1 && cap < n) n = cap;
    }
    return n;
  }();
  return budget;
}

template <class Fn>
void parallel_blocks(int num_blocks, Fn&& fn) {
  if (num_blocks <= 0) return;
  int workers = std::min(thread_budget(), num_blocks);
  if (workers <= 1) {
    for (int b = 0; b < num_blocks; ++b) fn(b);
    return;
  }
  std::atomic<int> next{0};
  auto run = [&] {
    for (;;) {
      int b = next.fetch_add(1);
      if (b >= num_blocks) break;
      fn(b);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int i = 0; i < workers - 1; ++i) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
}

}  // namespace isomer
