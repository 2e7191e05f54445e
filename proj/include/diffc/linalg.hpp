#pragma once

#include <vector>

#include "diffc/matrix.hpp"

namespace diffc {

/// Mean vector and covariance matrix of a Gaussian fit.
struct GaussianStats {
  std::vector<double> mean;
  Matrix cov;

  std::size_t dim() const noexcept { return mean.size(); }
};

struct SymEig {
  std::vector<double> values;  // descending
  Matrix vectors;              // orthonormal; column i pairs with values[i]
};

inline constexpr double kSymmetryTolerance = 1e-6;
inline constexpr double kPsdTolerance = 1e-6;

bool is_symmetric(const Matrix& m, double tolerance = kSymmetryTolerance);

/// Cyclic Jacobi eigensolver. Converges when the off-diagonal Frobenius norm
/// drops below 1e-10 times the matrix norm; gives up after 100 sweeps.
SymEig sym_eig(const Matrix& m);

/// Symmetric PSD square root. Eigenvalues in [−1e-6·scale, 0) are clamped to
/// zero; anything more negative throws NotPSD.
Matrix sqrtm_psd(const Matrix& m);

/// Sample mean and unbiased covariance of the rows of an N×d matrix.
GaussianStats mean_cov(const Matrix& samples);

/// Throws unless `stats.cov` is symmetric and PSD within tolerance.
void validate_gaussian(const GaussianStats& stats);

/// (a + aᵀ) / 2
Matrix symmetrized(const Matrix& a);

}  // namespace diffc
