#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "diffc/predictor.hpp"
#include "diffc/rng.hpp"
#include "diffc/schedule.hpp"
#include "diffc/tensor.hpp"

namespace diffc {

/// √ᾱ_t·x0 + √(1 − ᾱ_t)·eps
Tensor forward_sample(const Tensor& x0, int t, const Tensor& eps, const NoiseSchedule& sched);

/// Row-wise forward_sample for an N×… batch with one step per row.
Tensor forward_sample_batch(const Tensor& x0, std::span<const int> steps, const Tensor& eps,
                            const NoiseSchedule& sched);

struct Posterior {
  Tensor mean;
  double variance;
};

/// Mean and variance of q(x_{t−1} | x_t, x_0), t ≥ 2.
Posterior posterior_params(const Tensor& x0, const Tensor& xt, int t, const NoiseSchedule& sched);

/// One ancestral step with σ_t² = β̃_t. `z` must be all zeros at t = 1.
Tensor ddpm_step(const Tensor& xt, int t, const Tensor& eps_hat, const Tensor& z, const NoiseSchedule& sched);

enum class SamplerKind { ddpm, ddim };

std::string_view sampler_name(SamplerKind kind) noexcept;
std::optional<SamplerKind> parse_sampler(std::string_view name) noexcept;

struct SamplerConfig {
  SamplerKind kind = SamplerKind::ddpm;
  int steps = 0;  // DDIM subsequence length; ignored by DDPM
  double eta = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const SamplerConfig&, const SamplerConfig&) = default;
};

/// Update x_prev = x_coef·x + eps_coef·ε̂ + sigma·z for the step t → t_prev.
struct StepCoefficients {
  int t;
  int t_prev;
  double x_coef;
  double eps_coef;
  double sigma;
};

/// DDPM ancestral coefficients for t = T … 1.
std::vector<StepCoefficients> ddpm_coefficients(const NoiseSchedule& sched);

/// Evenly spaced strictly increasing subsequence of [1, T] containing 1 and T.
std::vector<int> ddim_timesteps(int total_steps, int steps);

/// DDIM coefficients over the subsequence, largest step first.
std::vector<StepCoefficients> ddim_coefficients(const NoiseSchedule& sched, const SamplerConfig& cfg);

/// Draw x_T ~ N(0, I) of shape [n, shape…], then run ddpm_sample_from.
/// Draw order: x_T first, then one noise tensor per step t = T … 2.
Tensor ddpm_sample(const EpsilonPredictor& model, std::size_t n, const Shape& shape, const NoiseSchedule& sched,
                   RngStream& rng);
Tensor ddpm_sample_from(const EpsilonPredictor& model, Tensor x_T, const NoiseSchedule& sched, RngStream& rng);

/// Draw x_T then run ddim_sample_from. Noise is drawn only on steps with σ > 0.
Tensor ddim_sample(const EpsilonPredictor& model, std::size_t n, const Shape& shape, const NoiseSchedule& sched,
                   const SamplerConfig& cfg, RngStream& rng);
Tensor ddim_sample_from(const EpsilonPredictor& model, Tensor x_T, const NoiseSchedule& sched,
                        const SamplerConfig& cfg, RngStream& rng);

/// Dispatches on cfg.kind.
Tensor sample(const EpsilonPredictor& model, std::size_t n, const Shape& shape, const NoiseSchedule& sched,
              const SamplerConfig& cfg, RngStream& rng);

struct LossResult {
  double loss;      // batch mean of ‖ε − ε̂‖²
  Tensor residual;  // ε̂ − ε
};

LossResult simple_loss(const EpsilonPredictor& model, const Tensor& x0, std::span<const int> steps,
                       const Tensor& eps, const NoiseSchedule& sched);

/// Terms of the variational bound, in nats summed over dimensions and
/// averaged over the batch.
struct ElboTerms {
  double prior_kl = 0.0;          // L_T
  std::vector<double> step_kl;    // L_{t−1} for t = 2 … T (index t − 2)
  double decoder_nll = 0.0;       // L_0
  std::size_t dims = 0;

  double total() const;
};

ElboTerms elbo_terms(const EpsilonPredictor& model, const Tensor& x0, const NoiseSchedule& sched, RngStream& rng);

}  // namespace diffc
