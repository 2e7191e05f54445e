#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "diffc/rng.hpp"
#include "diffc/tensor.hpp"

namespace diffc {

/// Square heightfield of side 2^k + 1 with values normalized to [0, 1].
class PlasmaGrid {
 public:
  PlasmaGrid(std::size_t side, std::vector<double> values);

  std::size_t side() const noexcept { return side_; }
  double operator()(std::size_t y, std::size_t x) const { return values_[y * side_ + x]; }
  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const PlasmaGrid&, const PlasmaGrid&) = default;

 private:
  std::size_t side_;
  std::vector<double> values_;
};

/// Diamond-square plasma fractal of side 2^k + 1. Corners start uniform in
/// [0, roughness]; each level adds offsets uniform in [−a, a] with a starting
/// at `roughness` and divided by `decay` after every level. The result is
/// min-max normalized; a flat grid normalizes to all zeros.
PlasmaGrid diamond_square(int k, double roughness, double decay, RngStream& rng);

/// Same construction with explicit corner values (top-left, top-right,
/// bottom-left, bottom-right) and starting amplitude. An amplitude of 0
/// removes all random offsets.
PlasmaGrid diamond_square_from_corners(int k, const std::array<double, 4>& corners, double amplitude,
                                       double decay, RngStream& rng);

/// Smallest detail level whose grid covers `extent` pixels.
int plasma_level_for(std::size_t extent);

/// Bilinearly resample the grid to max(H, W) squared, then crop the
/// top-left H×W block. Returns a 1×H×W tensor.
Tensor resample_plasma(const PlasmaGrid& grid, std::size_t height, std::size_t width);

/// Fog blend: with m = max(image) floored at 1e-6,
/// out = clamp((image + s·plasma)·m/(m + s), 0, 1), the same plasma on every channel.
Tensor fog_blend(const Tensor& image, const Tensor& plasma, double strength);

}  // namespace diffc
