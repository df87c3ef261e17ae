#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace pdmp {

/// Worker count: explicit value if positive, else $PDMP_WORKERS, else hardware.
inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PDMP_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Replicas are grouped in fixed-size blocks; each block is reduced in replica
/// order and blocks are merged in block order, so the result does not depend
/// on the number of workers.
inline constexpr std::size_t kReplicaBlock = 64;

/// Runs body(replica, acc) for replica in [0, reps) and returns the ordered
/// reduction. Acc needs a default constructor (or `init`) and merge(const Acc&).
template <class Acc, class Body>
Acc parallel_replicas(std::size_t reps, int workers, const Acc& init, Body body) {
  const std::size_t blocks = (reps + kReplicaBlock - 1) / kReplicaBlock;
  std::vector<Acc> partial(blocks, init);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&]() {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        const std::size_t lo = b * kReplicaBlock;
        const std::size_t hi = std::min(reps, lo + kReplicaBlock);
        for (std::size_t r = lo; r < hi; ++r) body(r, partial[b]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(blocks);
        return;
      }
    }
  };

  const int n = std::max(1, std::min<int>(resolve_workers(workers), static_cast<int>(std::max<std::size_t>(blocks, 1))));
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  Acc out = init;
  for (const auto& p : partial) out.merge(p);
  return out;
}

}  // namespace pdmp
