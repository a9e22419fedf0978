#pragma once

// Replica fan-out. Each replica is an independent unit of work; results are
// returned indexed by replica so folding order never depends on scheduling.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tscp {

/// Worker count from TSCP_WORKERS, else hardware concurrency.
inline int default_workers() {
  if (const char* env = std::getenv("TSCP_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

template <class Fn>
auto map_replicas(std::int64_t first, std::int64_t count, int workers, Fn&& fn)
    -> std::vector<decltype(fn(std::int64_t{}))> {
  using Result = decltype(fn(std::int64_t{}));
  std::vector<Result> out(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
  if (count <= 0) return out;
  workers = std::clamp<int>(workers, 1, static_cast<int>(std::min<std::int64_t>(count, 256)));
  if (workers == 1) {
    for (std::int64_t i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = fn(first + i);
    return out;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::int64_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          out[static_cast<std::size_t>(i)] = fn(first + i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace tscp
