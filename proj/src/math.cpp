#include "snakesim/math.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace snakesim {

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  const int n_threads = std::min(jobs, n);
  std::vector<std::thread> threads;
  threads.reserve(n_threads - 1);
  for (int t = 0; t + 1 < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
}

}  // namespace snakesim
