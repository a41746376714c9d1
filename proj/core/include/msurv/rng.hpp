#pragma once

#include <cstdint>
#include <initializer_list>

namespace msurv {

/// Deterministic random stream: xoshiro256** seeded through SplitMix64.
///
/// Streams are never shared between replicates. Each unit of simulated work
/// derives its own stream from the run seed and a path of integer keys
/// (replicate index, study index, ...), so results do not depend on the
/// order in which replicates are evaluated or on the number of workers.
/// All variates are produced by explicit transforms of the raw 64-bit
/// output, never by <random> distributions, whose algorithms are
/// implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  /// Stream for the given key path under `seed`.
  static RngStream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform_open();

  /// Uniform integer in [0, bound) via Lemire's unbiased multiply-shift.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Uniform integer in [lo, hi] (inclusive).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Standard normal variate by inversion.
  double normal();

 private:
  std::uint64_t s_[4];
};

/// SplitMix64 finaliser; exposed for key hashing.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace msurv
