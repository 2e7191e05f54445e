#pragma once

#include <array>
#include <cstdint>

#include "diffc/tensor.hpp"

namespace diffc {

/// Counter-based random stream (Philox-2x64-10). The 128-bit counter is
/// (stream_id, position); Philox is a bijection on the counter for a fixed
/// key, so two streams sharing a seed never produce overlapping blocks.
///
/// Not safe to share between threads. Derive children with `split`.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Standard normal via the Marsaglia polar transform; the second variate
  /// of each pair is cached and consumed by the next call.
  double normal() noexcept;
  /// Poisson(mean) by sequential inversion. Intended for mean <= ~100.
  std::uint64_t poisson(double mean) noexcept;

  /// Independent child stream keyed by (seed, mix(stream_id, child)).
  RngStream split(std::uint64_t child) const noexcept;

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t position_ = 0;
  std::array<std::uint64_t, 2> block_{};
  int block_used_ = 2;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// 64-bit finalizer (SplitMix64); used for seed derivation and digests.
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept;

/// i.i.d. N(0, 1) draws of the given shape.
Tensor gaussian_sample(RngStream& rng, const Shape& shape);

}  // namespace diffc
