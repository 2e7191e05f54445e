#pragma once

#include <cstddef>

#include "diffc/error.hpp"
#include "diffc/tensor.hpp"

namespace diffc::kernels::detail {

struct ConvGeometry {
  std::size_t channels, height, width, k;
};

inline ConvGeometry check_conv_args(const Tensor& image, const Tensor& kernel) {
  require(image.rank() == 3, Errc::ShapeMismatch, "conv2d expects a C×H×W image, got " + shape_str(image.shape()));
  require(kernel.rank() == 2 && kernel.dim(0) == kernel.dim(1), Errc::ShapeMismatch,
          "conv2d expects a square k×k kernel, got " + shape_str(kernel.shape()));
  const auto k = kernel.dim(0);
  require(k % 2 == 1, Errc::Precondition, "conv2d kernel size must be odd");
  const ConvGeometry g{image.dim(0), image.dim(1), image.dim(2), k};
  require(k <= g.height && k <= g.width, Errc::KernelTooLarge,
          "kernel " + std::to_string(k) + " exceeds image " + shape_str(image.shape()));
  return g;
}

/// Mirror index without repeating the edge sample: -1 -> 1, n -> n-2.
inline std::size_t reflect_index(long i, std::size_t n) {
  const long last = static_cast<long>(n) - 1;
  if (last == 0) return 0;
  if (i < 0) i = -i;
  if (i > last) i = 2 * last - i;
  return static_cast<std::size_t>(i);
}

}  // namespace diffc::kernels::detail
