#include "diffc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "diffc/error.hpp"
#include "diffc/kernels.hpp"

namespace diffc {
namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffDiagonalTolerance = 1e-10;

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

double psd_scale(const std::vector<double>& eigenvalues) {
  return std::max(1.0, eigenvalues.empty() ? 0.0 : eigenvalues.front());
}

}  // namespace

bool is_symmetric(const Matrix& m, double tolerance) {
  if (!m.square()) return false;
  const double bound = tolerance * std::max(1.0, m.max_abs());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > bound) return false;
  return true;
}

Matrix symmetrized(const Matrix& a) {
  require(a.square(), Errc::DimMismatch, "symmetrize of non-square matrix");
  Matrix s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

SymEig sym_eig(const Matrix& m) {
  require(m.square(), Errc::DimMismatch, "sym_eig of non-square matrix");
  require(is_symmetric(m), Errc::NonSymmetric, "sym_eig input not symmetric within tolerance");
  const std::size_t n = m.rows();
  Matrix a = symmetrized(m);
  Matrix v = Matrix::identity(n);

  const double scale = a.frobenius_norm();
  if (scale > 0.0) {
    int sweep = 0;
    for (; sweep < kMaxSweeps; ++sweep) {
      if (off_diagonal_norm(a) < kOffDiagonalTolerance * scale) break;
      for (std::size_t p = 0; p + 1 < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
          const double apq = a(p, q);
          if (apq == 0.0) continue;
          const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
          const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          for (std::size_t k = 0; k < n; ++k) {
            const double akp = a(k, p);
            const double akq = a(k, q);
            a(k, p) = c * akp - s * akq;
            a(k, q) = s * akp + c * akq;
          }
          for (std::size_t k = 0; k < n; ++k) {
            const double apk = a(p, k);
            const double aqk = a(q, k);
            a(p, k) = c * apk - s * aqk;
            a(q, k) = s * apk + c * aqk;
          }
          for (std::size_t k = 0; k < n; ++k) {
            const double vkp = v(k, p);
            const double vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
    require(sweep < kMaxSweeps || off_diagonal_norm(a) < kOffDiagonalTolerance * scale, Errc::NoConvergence,
            "Jacobi eigensolver exceeded " + std::to_string(kMaxSweeps) + " sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) > a(j, j); });

  SymEig out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t col = 0; col < n; ++col) {
    out.values[col] = a(order[col], order[col]);
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, col) = v(k, order[col]);
  }
  return out;
}

Matrix sqrtm_psd(const Matrix& m) {
  const SymEig eig = sym_eig(m);
  const double floor = -kPsdTolerance * psd_scale(eig.values);
  const std::size_t n = m.rows();
  Matrix scaled = eig.vectors;
  for (std::size_t col = 0; col < n; ++col) {
    const double w = eig.values[col];
    require(w >= floor, Errc::NotPSD, "eigenvalue " + std::to_string(w) + " below PSD tolerance");
    const double root = std::sqrt(std::max(w, 0.0));
    for (std::size_t k = 0; k < n; ++k) scaled(k, col) *= root;
  }
  return symmetrized(kernels::matmul_bt(scaled, eig.vectors));
}

GaussianStats mean_cov(const Matrix& samples) {
  const std::size_t n = samples.rows();
  const std::size_t d = samples.cols();
  require(n >= 2, Errc::TooFewSamples, "mean_cov needs at least 2 samples, got " + std::to_string(n));
  GaussianStats stats{std::vector<double>(d, 0.0), Matrix()};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) stats.mean[j] += samples(i, j);
  for (double& v : stats.mean) v /= static_cast<double>(n);
  Matrix cov = kernels::scatter(samples, stats.mean);
  stats.cov = symmetrized((1.0 / static_cast<double>(n - 1)) * cov);
  return stats;
}

void validate_gaussian(const GaussianStats& stats) {
  require(stats.cov.rows() == stats.dim() && stats.cov.cols() == stats.dim(), Errc::DimMismatch,
          "covariance dims do not match mean");
  require(is_symmetric(stats.cov), Errc::NonSymmetric, "covariance not symmetric");
  const SymEig eig = sym_eig(stats.cov);
  require(eig.values.empty() || eig.values.back() >= -kPsdTolerance * psd_scale(eig.values), Errc::NotPSD,
          "covariance not PSD");
}

}  // namespace diffc
