#include "diffc/plasma.hpp"

#include <algorithm>
#include <cmath>

#include "diffc/error.hpp"

namespace diffc {

PlasmaGrid::PlasmaGrid(std::size_t side, std::vector<double> values) : side_(side), values_(std::move(values)) {
  require(side >= 3 && ((side - 1) & (side - 2)) == 0, Errc::BadDetailLevel,
          "plasma side must be 2^k + 1, got " + std::to_string(side));
  require(values_.size() == side * side, Errc::ShapeMismatch, "plasma value count");
}

PlasmaGrid diamond_square(int k, double roughness, double decay, RngStream& rng) {
  require(roughness > 0.0, Errc::Precondition, "diamond_square roughness must be positive");
  require(k >= 1 && k <= 12, Errc::BadDetailLevel, "detail level must be in [1, 12], got " + std::to_string(k));
  std::array<double, 4> corners{};
  for (double& c : corners) c = rng.uniform(0.0, roughness);
  return diamond_square_from_corners(k, corners, roughness, decay, rng);
}

PlasmaGrid diamond_square_from_corners(int k, const std::array<double, 4>& corners, double amplitude,
                                       double decay, RngStream& rng) {
  require(k >= 1 && k <= 12, Errc::BadDetailLevel, "detail level must be in [1, 12], got " + std::to_string(k));
  require(decay > 1.0, Errc::Precondition, "diamond_square decay must exceed 1");
  require(amplitude >= 0.0, Errc::Precondition, "diamond_square amplitude must be nonnegative");

  const std::size_t side = (std::size_t{1} << k) + 1;
  std::vector<double> g(side * side, 0.0);
  auto at = [&](std::size_t y, std::size_t x) -> double& { return g[y * side + x]; };
  const std::size_t last = side - 1;
  at(0, 0) = corners[0];
  at(0, last) = corners[1];
  at(last, 0) = corners[2];
  at(last, last) = corners[3];

  auto offset = [&] { return amplitude > 0.0 ? rng.uniform(-amplitude, amplitude) : 0.0; };

  for (std::size_t step = last; step > 1; step /= 2) {
    const std::size_t half = step / 2;
    // Diamond step: centre of every square.
    for (std::size_t y = half; y < side; y += step)
      for (std::size_t x = half; x < side; x += step) {
        const double mean =
            (at(y - half, x - half) + at(y - half, x + half) + at(y + half, x - half) + at(y + half, x + half)) / 4.0;
        at(y, x) = mean + offset();
      }
    // Square step: edge midpoints, averaging whichever neighbours exist.
    for (std::size_t y = 0; y < side; y += half) {
      const std::size_t x0 = ((y / half) % 2 == 0) ? half : 0;
      for (std::size_t x = x0; x < side; x += step) {
        double sum = 0.0;
        int count = 0;
        if (y >= half) sum += at(y - half, x), ++count;
        if (y + half < side) sum += at(y + half, x), ++count;
        if (x >= half) sum += at(y, x - half), ++count;
        if (x + half < side) sum += at(y, x + half), ++count;
        at(y, x) = sum / count + offset();
      }
    }
    amplitude /= decay;
  }

  const auto [lo_it, hi_it] = std::minmax_element(g.begin(), g.end());
  const double lo = *lo_it;
  // Spreads at rounding level (e.g. a mean of three equal corners) count as flat.
  const double scale = std::max({std::abs(lo), std::abs(*hi_it), 1.0});
  const bool flat = *hi_it - lo <= 1e-12 * scale;
  const double range = flat ? 0.0 : *hi_it - lo;
  for (double& v : g) v = flat ? 0.0 : (v - lo) / range;
  if (!flat) {
    // Pin the extremes so normalization is exact despite rounding.
    *lo_it = 0.0;
    *hi_it = 1.0;
  }
  return PlasmaGrid(side, std::move(g));
}

int plasma_level_for(std::size_t extent) {
  require(extent >= 1, Errc::Precondition, "plasma extent must be positive");
  int k = 1;
  while ((std::size_t{1} << k) + 1 < extent) ++k;
  require(k <= 12, Errc::BadDetailLevel, "image too large for plasma generation");
  return k;
}

Tensor resample_plasma(const PlasmaGrid& grid, std::size_t height, std::size_t width) {
  const std::size_t target = std::max(height, width);
  require(target >= 1 && target <= grid.side(), Errc::ShapeMismatch, "plasma grid smaller than image");
  Tensor out(Shape{1, height, width});
  const double scale = target > 1 ? static_cast<double>(grid.side() - 1) / static_cast<double>(target - 1) : 0.0;
  for (std::size_t y = 0; y < height; ++y) {
    const double gy = static_cast<double>(y) * scale;
    const auto y0 = std::min(static_cast<std::size_t>(gy), grid.side() - 1);
    const auto y1 = std::min(y0 + 1, grid.side() - 1);
    const double fy = gy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double gx = static_cast<double>(x) * scale;
      const auto x0 = std::min(static_cast<std::size_t>(gx), grid.side() - 1);
      const auto x1 = std::min(x0 + 1, grid.side() - 1);
      const double fx = gx - static_cast<double>(x0);
      const double top = grid(y0, x0) * (1.0 - fx) + grid(y0, x1) * fx;
      const double bottom = grid(y1, x0) * (1.0 - fx) + grid(y1, x1) * fx;
      out.at(0, y, x) = static_cast<float>(std::clamp(top * (1.0 - fy) + bottom * fy, 0.0, 1.0));
    }
  }
  return out;
}

Tensor fog_blend(const Tensor& image, const Tensor& plasma, double strength) {
  require(strength > 0.0, Errc::Precondition, "fog strength must be positive");
  require(image.rank() == 3 && plasma.rank() == 3 && plasma.dim(0) == 1 && plasma.dim(1) == image.dim(1) &&
              plasma.dim(2) == image.dim(2),
          Errc::ShapeMismatch, "fog plasma " + shape_str(plasma.shape()) + " vs image " + shape_str(image.shape()));
  const double m = std::max(static_cast<double>(image.max_value()), 1e-6);
  const double gain = m / (m + strength);
  const std::size_t plane = image.dim(1) * image.dim(2);
  Tensor out(image.shape());
  for (std::size_t c = 0; c < image.dim(0); ++c)
    for (std::size_t i = 0; i < plane; ++i) {
      const double v = (image[c * plane + i] + strength * plasma[i]) * gain;
      out[c * plane + i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  return out;
}

}  // namespace diffc
