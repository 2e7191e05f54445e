#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "diffc/error.hpp"
#include "diffc/kernels.hpp"
#include "kernels_common.hpp"

namespace diffc {

Tensor conv2d(const Tensor& image, const Tensor& kernel, Padding padding) {
  return kernels::conv2d(image, kernel, padding);
}

namespace kernels {

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

Tensor conv2d(const Tensor& image, const Tensor& kernel, Padding padding) {
  const auto g = detail::check_conv_args(image, kernel);
  const std::size_t r = g.k / 2;
  const std::size_t ph = g.height + 2 * r;
  const std::size_t pw = g.width + 2 * r;

  // Materialize the padded planes once so the inner loop is branch-free.
  std::vector<double> padded(g.channels * ph * pw, 0.0);
  for (std::size_t c = 0; c < g.channels; ++c)
    for (std::size_t y = 0; y < ph; ++y)
      for (std::size_t x = 0; x < pw; ++x) {
        const long sy = static_cast<long>(y) - static_cast<long>(r);
        const long sx = static_cast<long>(x) - static_cast<long>(r);
        double v = 0.0;
        if (padding == Padding::reflect) {
          v = image.at(c, detail::reflect_index(sy, g.height), detail::reflect_index(sx, g.width));
        } else if (sy >= 0 && sx >= 0 && sy < static_cast<long>(g.height) && sx < static_cast<long>(g.width)) {
          v = image.at(c, static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
        }
        padded[(c * ph + y) * pw + x] = v;
      }

  std::vector<double> weights(kernel.data().begin(), kernel.data().end());
  Tensor out(image.shape());
  const long rows = static_cast<long>(g.channels * g.height);

#pragma omp parallel for schedule(static)
  for (long cy = 0; cy < rows; ++cy) {
    const std::size_t c = static_cast<std::size_t>(cy) / g.height;
    const std::size_t y = static_cast<std::size_t>(cy) % g.height;
    const double* plane = padded.data() + c * ph * pw;
    for (std::size_t x = 0; x < g.width; ++x) {
      double acc = 0.0;
      for (std::size_t ky = 0; ky < g.k; ++ky) {
        const double* src = plane + (y + ky) * pw + x;
        const double* w = weights.data() + ky * g.k;
        for (std::size_t kx = 0; kx < g.k; ++kx) acc += w[kx] * src[kx];
      }
      out.at(c, y, x) = static_cast<float>(acc);
    }
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), Errc::DimMismatch, "matmul inner dims");
  Matrix c(a.rows(), b.cols());
  const long n = static_cast<long>(a.rows());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    auto out = c.row(static_cast<std::size_t>(i));
    const auto lhs = a.row(static_cast<std::size_t>(i));
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double s = lhs[k];
      const auto rhs = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out[j] += s * rhs[j];
    }
  }
  return c;
}

Matrix matmul_bt(const Matrix& a, const Matrix& b, std::span<const double> bias) {
  require(a.cols() == b.cols(), Errc::DimMismatch, "matmul_bt inner dims");
  require(bias.empty() || bias.size() == b.rows(), Errc::DimMismatch, "matmul_bt bias length");
  Matrix c(a.rows(), b.rows());
  const long n = static_cast<long>(a.rows());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const auto lhs = a.row(static_cast<std::size_t>(i));
    auto out = c.row(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto rhs = b.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < lhs.size(); ++k) acc += lhs[k] * rhs[k];
      out[j] = bias.empty() ? acc : acc + bias[j];
    }
  }
  return c;
}

Matrix matmul_at(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), Errc::DimMismatch, "matmul_at row counts");
  Matrix c(a.cols(), b.cols());
  const long m = static_cast<long>(a.cols());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < m; ++i) {
    auto out = c.row(static_cast<std::size_t>(i));
    for (std::size_t n = 0; n < a.rows(); ++n) {
      const double s = a(n, static_cast<std::size_t>(i));
      const auto rhs = b.row(n);
      for (std::size_t j = 0; j < rhs.size(); ++j) out[j] += s * rhs[j];
    }
  }
  return c;
}

Matrix scatter(const Matrix& samples, std::span<const double> mean) {
  require(mean.size() == samples.cols(), Errc::DimMismatch, "scatter mean length");
  const auto d = samples.cols();
  Matrix centered = samples;
  for (std::size_t n = 0; n < centered.rows(); ++n) {
    auto row = centered.row(n);
    for (std::size_t j = 0; j < d; ++j) row[j] -= mean[j];
  }
  Matrix s(d, d);
  const long dl = static_cast<long>(d);
  // Upper triangle only; products commute exactly so the mirror is identical.
#pragma omp parallel for schedule(dynamic, 4)
  for (long il = 0; il < dl; ++il) {
    const auto i = static_cast<std::size_t>(il);
    for (std::size_t j = i; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t n = 0; n < centered.rows(); ++n) acc += centered(n, i) * centered(n, j);
      s(i, j) = acc;
      s(j, i) = acc;
    }
  }
  return s;
}

}  // namespace kernels
}  // namespace diffc
