#pragma once

#include <span>

#include "diffc/matrix.hpp"
#include "diffc/tensor.hpp"

// Hot loops of the pipeline. The functions in `diffc::kernels` are the
// OpenMP-parallel versions used by the library; `diffc::kernels::reference`
// holds plain serial loops kept as the test oracle. Each parallel kernel
// partitions work by output element and keeps the reference accumulation
// order, so both paths agree bit for bit regardless of thread count.

namespace diffc {

enum class Padding { reflect, zero };

/// Per-channel 2-D correlation of a C×H×W image with an odd k×k kernel.
/// Output shape equals input shape. Throws KernelTooLarge if k > min(H, W).
Tensor conv2d(const Tensor& image, const Tensor& kernel, Padding padding = Padding::reflect);

namespace kernels {

Tensor conv2d(const Tensor& image, const Tensor& kernel, Padding padding);

/// a · b
Matrix matmul(const Matrix& a, const Matrix& b);
/// a · bᵀ plus an optional per-column bias (length b.rows()).
Matrix matmul_bt(const Matrix& a, const Matrix& b, std::span<const double> bias = {});
/// aᵀ · b, summed over rows in ascending order.
Matrix matmul_at(const Matrix& a, const Matrix& b);
/// Σ_n (x_n − mean)ᵀ (x_n − mean), the unnormalized scatter matrix.
Matrix scatter(const Matrix& samples, std::span<const double> mean);

namespace reference {

Tensor conv2d(const Tensor& image, const Tensor& kernel, Padding padding);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_bt(const Matrix& a, const Matrix& b, std::span<const double> bias = {});
Matrix matmul_at(const Matrix& a, const Matrix& b);
Matrix scatter(const Matrix& samples, std::span<const double> mean);

}  // namespace reference

/// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int max_threads() noexcept;

}  // namespace kernels
}  // namespace diffc
