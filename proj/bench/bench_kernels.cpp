// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS to vary width.
#include <benchmark/benchmark.h>

#include <vector>

#include "diffc/kernels.hpp"
#include "diffc/rng.hpp"

using namespace diffc;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<double> v(r * c);
  for (double& x : v) x = rng.normal();
  return Matrix(r, c, std::move(v));
}

Tensor random_image(std::size_t side) {
  RngStream rng(9, 0);
  return gaussian_sample(rng, {3, side, side});
}

Tensor box_kernel(std::size_t k) { return Tensor(Shape{k, k}, 1.0f / static_cast<float>(k * k)); }

template <bool Parallel>
void BM_Conv2d(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const Tensor img = random_image(side), k = box_kernel(7);
  for (auto _ : state) {
    Tensor out = Parallel ? kernels::conv2d(img, k, Padding::reflect)
                          : kernels::reference::conv2d(img, k, Padding::reflect);
    benchmark::DoNotOptimize(out);
  }
}

template <bool Parallel>
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) {
    Matrix c = Parallel ? kernels::matmul(a, b) : kernels::reference::matmul(a, b);
    benchmark::DoNotOptimize(c);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n * n));
}

template <bool Parallel>
void BM_MatmulBt(benchmark::State& state) {
  // Shape of a dense layer forward pass: batch 128 into a square layer.
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = random_matrix(128, n, 1), w = random_matrix(n, n, 2);
  const std::vector<double> bias(n, 0.5);
  for (auto _ : state) {
    Matrix c = Parallel ? kernels::matmul_bt(x, w, bias) : kernels::reference::matmul_bt(x, w, bias);
    benchmark::DoNotOptimize(c);
  }
}

template <bool Parallel>
void BM_Scatter(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const Matrix s = random_matrix(2000, d, 3);
  const std::vector<double> mean(d, 0.0);
  for (auto _ : state) {
    Matrix c = Parallel ? kernels::scatter(s, mean) : kernels::reference::scatter(s, mean);
    benchmark::DoNotOptimize(c);
  }
}

}  // namespace

BENCHMARK(BM_Conv2d<false>)->Name("conv2d/reference")->Arg(64)->Arg(256);
BENCHMARK(BM_Conv2d<true>)->Name("conv2d/openmp")->Arg(64)->Arg(256);
BENCHMARK(BM_Matmul<false>)->Name("matmul/reference")->Arg(128)->Arg(256);
BENCHMARK(BM_Matmul<true>)->Name("matmul/openmp")->Arg(128)->Arg(256);
BENCHMARK(BM_MatmulBt<false>)->Name("matmul_bt/reference")->Arg(256);
BENCHMARK(BM_MatmulBt<true>)->Name("matmul_bt/openmp")->Arg(256);
BENCHMARK(BM_Scatter<false>)->Name("scatter/reference")->Arg(64)->Arg(256);
BENCHMARK(BM_Scatter<true>)->Name("scatter/openmp")->Arg(64)->Arg(256);

BENCHMARK_MAIN();
