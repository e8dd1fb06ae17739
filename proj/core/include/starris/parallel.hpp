#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace starris {

// Runs fn(0..count-1) on `threads` workers (<= 1 runs inline). The first
// exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

// Independent generator for (master seed, stream, index). Depends only on its
// arguments, so per-trial draws do not change with the worker count.
std::mt19937_64 counter_rng(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t index);

}  // namespace starris
