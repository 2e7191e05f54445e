// Serial reference loops. Deliberately naive: every output element is
// computed directly from its definition.

#include "diffc/error.hpp"
#include "diffc/kernels.hpp"
#include "kernels_common.hpp"

namespace diffc::kernels::reference {

Tensor conv2d(const Tensor& image, const Tensor& kernel, Padding padding) {
  const auto geom = detail::check_conv_args(image, kernel);
  const long r = static_cast<long>(geom.k / 2);
  Tensor out(image.shape());
  for (std::size_t c = 0; c < geom.channels; ++c) {
    for (std::size_t y = 0; y < geom.height; ++y) {
      for (std::size_t x = 0; x < geom.width; ++x) {
        double acc = 0.0;
        for (std::size_t ky = 0; ky < geom.k; ++ky) {
          for (std::size_t kx = 0; kx < geom.k; ++kx) {
            const long sy = static_cast<long>(y) + static_cast<long>(ky) - r;
            const long sx = static_cast<long>(x) + static_cast<long>(kx) - r;
            double v = 0.0;
            if (padding == Padding::reflect) {
              v = image.at(c, detail::reflect_index(sy, geom.height), detail::reflect_index(sx, geom.width));
            } else if (sy >= 0 && sx >= 0 && sy < static_cast<long>(geom.height) &&
                       sx < static_cast<long>(geom.width)) {
              v = image.at(c, static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
            }
            acc += static_cast<double>(kernel[ky * geom.k + kx]) * v;
          }
        }
        out.at(c, y, x) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), Errc::DimMismatch, "matmul inner dims");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  return c;
}

Matrix matmul_bt(const Matrix& a, const Matrix& b, std::span<const double> bias) {
  require(a.cols() == b.cols(), Errc::DimMismatch, "matmul_bt inner dims");
  require(bias.empty() || bias.size() == b.rows(), Errc::DimMismatch, "matmul_bt bias length");
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(j, k);
      c(i, j) = bias.empty() ? acc : acc + bias[j];
    }
  return c;
}

Matrix matmul_at(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), Errc::DimMismatch, "matmul_at row counts");
  Matrix c(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t n = 0; n < a.rows(); ++n) acc += a(n, i) * b(n, j);
      c(i, j) = acc;
    }
  return c;
}

Matrix scatter(const Matrix& samples, std::span<const double> mean) {
  require(mean.size() == samples.cols(), Errc::DimMismatch, "scatter mean length");
  const auto d = samples.cols();
  Matrix s(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t n = 0; n < samples.rows(); ++n)
        acc += (samples(n, i) - mean[i]) * (samples(n, j) - mean[j]);
      s(i, j) = acc;
    }
  return s;
}

}  // namespace diffc::kernels::reference
