#pragma once

#include <cstdint>
#include <functional>
#include <random>

// Deterministic work splitting. Every parallel unit derives its own RNG from
// the master seed and its indices, so results do not depend on the worker
// count or on scheduling order.

namespace lsearch {

// Worker count resolution: explicit request > LSEARCH_WORKERS env var >
// hardware concurrency. Always at least 1.
int resolve_workers(int requested);

// Runs fn(0) .. fn(n - 1), using up to `workers` threads when workers > 1.
// fn must only touch per-index state.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// splitmix64-style mixing of a master seed with stream indices.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                       std::uint64_t c = 0);

inline std::mt19937_64 make_rng(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                std::uint64_t c = 0) {
  return std::mt19937_64(mix_seed(master, a, b, c));
}

}  // namespace lsearch
