#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace fingen::rl {

// Runs body(i) for i in [0, count) on up to `workers` threads. Results must be
// written by index so the outcome does not depend on scheduling. The first
// exception thrown by any body is rethrown after all threads join.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

// Number of workers to use when the config says 0.
int default_workers();

// Deterministic 64-bit seed for stream `index` of run `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace fingen::rl
