#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace winstat {

/// Deterministic partition of [0, n): chunk boundaries depend only on n and
/// threads, never on scheduling, so per-chunk results combined in chunk
/// order are bit-identical for every thread count.
struct ChunkPlan {
  std::size_t n = 0;
  std::size_t chunk = 1;
  std::size_t count = 0;

  ChunkPlan(std::size_t n_, int threads) : n(n_) {
    std::size_t w = threads < 1 ? 1 : static_cast<std::size_t>(threads);
    w = std::min(w, n ? n : std::size_t{1});
    chunk = (n + w - 1) / w;
    if (chunk == 0) chunk = 1;
    count = n == 0 ? 0 : (n + chunk - 1) / chunk;
  }
  std::size_t begin(std::size_t i) const { return i * chunk; }
  std::size_t end(std::size_t i) const { return std::min(n, (i + 1) * chunk); }
};

/// Runs fn(chunk_index, begin, end) for every chunk of the plan, one thread
/// per chunk (sequential when a single chunk suffices).
template <typename Fn>
void parallel_chunks(const ChunkPlan& plan, Fn&& fn) {
  if (plan.count == 0) return;
  if (plan.count == 1) {
    fn(std::size_t{0}, plan.begin(0), plan.end(0));
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(plan.count);
  for (std::size_t i = 0; i < plan.count; ++i)
    pool.emplace_back(
        [&fn, i, b = plan.begin(i), e = plan.end(i)] { fn(i, b, e); });
  for (auto& th : pool) th.join();
}

}  // namespace winstat
