#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diffc/linalg.hpp"
#include "diffc/predictor.hpp"
#include "diffc/rng.hpp"
#include "diffc/schedule.hpp"
#include "diffc/tensor.hpp"

namespace diffc {

/// Exact E[ε | x_t] for Gaussian data x₀ ~ N(μ, Σ) under the forward
/// process. Works in Σ's eigenbasis, so a singular Σ is fine.
class AnalyticGaussianPredictor final : public EpsilonPredictor {
 public:
  AnalyticGaussianPredictor(GaussianStats data, NoiseSchedule sched);

  Tensor predict(const Tensor& xt, std::span<const int> steps) const override;

  const GaussianStats& data() const noexcept { return data_; }
  const NoiseSchedule& schedule() const noexcept { return sched_; }

 private:
  GaussianStats data_;
  NoiseSchedule sched_;
  Matrix basis_;                    // eigenvectors of Σ, as columns
  std::vector<double> eigenvalues_;
};

/// Convenience: fit mean/covariance to an N×… batch and bind the predictor.
AnalyticGaussianPredictor fit_analytic_predictor(const Tensor& data, const NoiseSchedule& sched);

inline constexpr std::size_t kTimeEmbeddingDim = 16;
inline constexpr std::size_t kMaxParameters = 1'000'000;

/// Sinusoidal embedding of a timestep: sin(t·f_i) then cos(t·f_i),
/// f_i = 10000^(−i/(dim/2)).
std::vector<double> time_embedding(int t, std::size_t dim = kTimeEmbeddingDim);

struct DenseLayer {
  Tensor weight;  // out × in
  Tensor bias;    // out
};

struct LayerSpec {
  std::size_t data_dim = 0;
  std::vector<std::size_t> hidden;
  std::size_t embed_dim = kTimeEmbeddingDim;
};

/// Per-layer gradients, mirroring the layer list.
struct Gradients {
  std::vector<DenseLayer> layers;
};

/// Training batch: clean data, per-row steps, and the injected noise.
struct NoiseBatch {
  Tensor x0;
  std::vector<int> steps;
  Tensor eps;
};

/// MLP ε-predictor: input [x_t ; emb(t)], SiLU hidden layers, linear output.
class TinyDenoiser final : public EpsilonPredictor {
 public:
  explicit TinyDenoiser(LayerSpec spec);
  /// He-style initialization from `rng`; output layer scaled down.
  static TinyDenoiser initialized(LayerSpec spec, RngStream& rng);

  Tensor predict(const Tensor& xt, std::span<const int> steps) const override;

  const LayerSpec& spec() const noexcept { return spec_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::size_t parameter_count() const;
  bool all_finite() const;

  /// Forward pass in float64; rows are samples.
  Matrix forward(const Matrix& xt, std::span<const int> steps) const;

 private:
  LayerSpec spec_;
  std::vector<DenseLayer> layers_;
};

/// Tensor view of predict() for a flat N×d matrix.
Matrix to_matrix(const Tensor& batch);
Tensor to_tensor(const Matrix& m, const Shape& shape);

struct LossAndGradient {
  double loss;
  Gradients grads;
};

/// simple_loss of the network on `batch` (float64 throughout).
double net_loss(const TinyDenoiser& model, const NoiseBatch& batch, const NoiseSchedule& sched);

/// Exact reverse-mode gradient of net_loss with respect to every weight.
LossAndGradient net_gradient(const TinyDenoiser& model, const NoiseBatch& batch, const NoiseSchedule& sched);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<DenseLayer> first_moment;
  std::vector<DenseLayer> second_moment;

  static AdamState for_model(const TinyDenoiser& model, AdamConfig config = {});
};

/// Bias-corrected Adam step applied in place.
void adam_update(AdamState& state, std::vector<DenseLayer>& weights, const Gradients& grads);

struct TrainConfig {
  int epochs = 30;
  std::size_t batch_size = 128;
  double lr = 1e-4;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // mean batch loss per epoch
};

/// Shuffled mini-batch training on an N×… dataset in the signed domain.
/// Every batch draws t uniform on [1, T] and ε ~ N(0, I) per row.
TrainResult train(TinyDenoiser& model, const Tensor& data, const NoiseSchedule& sched, const TrainConfig& cfg,
                  RngStream& rng);

/// Checkpoint as a DFC1 tensor sequence: a header tensor with the layer
/// spec followed by weight/bias pairs.
void save_checkpoint(const TinyDenoiser& model, const std::string& path);
TinyDenoiser load_checkpoint(const std::string& path);

}  // namespace diffc
