#include "diffc/rng.hpp"

#include <cmath>

#include "diffc/error.hpp"

namespace diffc {
namespace {

constexpr std::uint64_t kPhiloxMul = 0xD2B74407B1CE6E93ULL;
constexpr std::uint64_t kPhiloxWeyl = 0x9E3779B97F4A7C15ULL;

std::array<std::uint64_t, 2> philox2x64(std::uint64_t hi, std::uint64_t lo, std::uint64_t key) noexcept {
  for (int round = 0; round < 10; ++round) {
    const unsigned __int128 product = static_cast<unsigned __int128>(kPhiloxMul) * lo;
    const auto prod_hi = static_cast<std::uint64_t>(product >> 64);
    const auto prod_lo = static_cast<std::uint64_t>(product);
    lo = prod_hi ^ key ^ hi;
    hi = prod_lo;
    key += kPhiloxWeyl;
  }
  return {lo, hi};
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
  return mix64(seed ^ mix64(value));
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed), stream_id_(stream_id) {}

std::uint64_t RngStream::next_u64() noexcept {
  if (block_used_ == 2) {
    block_ = philox2x64(stream_id_, position_++, seed_);
    block_used_ = 0;
  }
  return block_[block_used_++];
}

double RngStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t n) noexcept {
  // Lemire-style rejection keeps the result unbiased.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

double RngStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0, v = 0.0, s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

std::uint64_t RngStream::poisson(double mean) noexcept {
  if (mean <= 0.0) return 0;
  const double u = uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::uint64_t k = 0;
  // The cap guards against u landing in the float tail beyond the cdf.
  while (u > cdf && k < 10000) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

RngStream RngStream::split(std::uint64_t child) const noexcept {
  return RngStream(seed_, hash_combine(stream_id_, child));
}

Tensor gaussian_sample(RngStream& rng, const Shape& shape) {
  require(!shape.empty(), Errc::Precondition, "gaussian_sample: empty shape");
  for (auto d : shape) require(d > 0, Errc::Precondition, "gaussian_sample: zero dimension in " + shape_str(shape));
  Tensor out(shape);
  for (auto& v : out.values()) v = static_cast<float>(rng.normal());
  return out;
}

}  // namespace diffc
