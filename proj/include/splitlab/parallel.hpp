#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>

namespace splitlab {

/// Worker count: SPLITLAB_WORKERS if set to a positive integer, else hardware concurrency.
unsigned worker_count();

/// Runs fn(i) for i in [0, n) on a pool of worker threads. Work items must be
/// independent; callers write results into slot i so output order never depends
/// on scheduling. The exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Deterministic per-item random stream derived from (seed, index) via SplitMix64.
class SplitMix64 {
 public:
  SplitMix64(std::uint64_t seed, std::uint64_t index);
  std::uint64_t next();
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_;
};

}  // namespace splitlab
