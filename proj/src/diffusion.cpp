#include "diffc/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "diffc/error.hpp"

namespace diffc {
namespace {

constexpr double kDecoderVarianceFloor = 1e-6;

double forward_alpha_bar(const NoiseSchedule& sched, int t) {
  require(t >= 1 && t <= sched.steps(), Errc::StepOutOfRange, "forward step " + std::to_string(t) + " out of range");
  return sched.alpha_bar(t);
}

std::vector<int> repeat_step(std::size_t n, int t) { return std::vector<int>(n, t); }

Shape batch_shape(std::size_t n, const Shape& shape) {
  Shape full{n};
  full.insert(full.end(), shape.begin(), shape.end());
  return full;
}

Tensor apply_coefficients(const Tensor& x, const Tensor& eps_hat, const StepCoefficients& c, const Tensor* z) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = c.x_coef * x[i] + c.eps_coef * eps_hat[i];
    if (z != nullptr) v += c.sigma * (*z)[i];
    out[i] = static_cast<float>(v);
  }
  return out;
}

/// μ_θ(x_t, t) = (x_t − β_t/√(1 − ᾱ_t)·ε̂)/√α_t
std::vector<double> model_mean(const Tensor& xt, const Tensor& eps_hat, int t, const NoiseSchedule& sched) {
  const double coef = sched.beta(t) / std::sqrt(1.0 - sched.alpha_bar(t));
  const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha(t));
  std::vector<double> mean(xt.size());
  for (std::size_t i = 0; i < xt.size(); ++i) mean[i] = (xt[i] - coef * eps_hat[i]) * inv_sqrt_alpha;
  return mean;
}

}  // namespace

Tensor ZeroPredictor::predict(const Tensor& xt, std::span<const int>) const { return Tensor(xt.shape()); }

std::string_view sampler_name(SamplerKind kind) noexcept { return kind == SamplerKind::ddpm ? "ddpm" : "ddim"; }

std::optional<SamplerKind> parse_sampler(std::string_view name) noexcept {
  if (name == "ddpm") return SamplerKind::ddpm;
  if (name == "ddim") return SamplerKind::ddim;
  return std::nullopt;
}

Tensor forward_sample(const Tensor& x0, int t, const Tensor& eps, const NoiseSchedule& sched) {
  require_same_shape(x0, eps, "forward_sample");
  const double ab = forward_alpha_bar(sched, t);
  const double a = std::sqrt(ab), b = std::sqrt(1.0 - ab);
  Tensor out(x0.shape());
  for (std::size_t i = 0; i < x0.size(); ++i) out[i] = static_cast<float>(a * x0[i] + b * eps[i]);
  return out;
}

Tensor forward_sample_batch(const Tensor& x0, std::span<const int> steps, const Tensor& eps,
                            const NoiseSchedule& sched) {
  require_same_shape(x0, eps, "forward_sample_batch");
  require(steps.size() == x0.dim(0), Errc::ShapeMismatch, "one step per batch row required");
  const std::size_t d = x0.row_size();
  Tensor out(x0.shape());
  for (std::size_t n = 0; n < steps.size(); ++n) {
    const double ab = forward_alpha_bar(sched, steps[n]);
    const double a = std::sqrt(ab), b = std::sqrt(1.0 - ab);
    for (std::size_t j = n * d; j < (n + 1) * d; ++j) out[j] = static_cast<float>(a * x0[j] + b * eps[j]);
  }
  return out;
}

Posterior posterior_params(const Tensor& x0, const Tensor& xt, int t, const NoiseSchedule& sched) {
  require_same_shape(x0, xt, "posterior_params");
  require(t >= 2 && t <= sched.steps(), Errc::StepOutOfRange, "posterior needs 2 <= t <= T");
  const double ab = sched.alpha_bar(t), ab_prev = sched.alpha_bar(t - 1);
  const double denom = 1.0 - ab;
  const double c0 = std::sqrt(ab_prev) * sched.beta(t) / denom;
  const double ct = std::sqrt(sched.alpha(t)) * (1.0 - ab_prev) / denom;
  Tensor mean(x0.shape());
  for (std::size_t i = 0; i < x0.size(); ++i) mean[i] = static_cast<float>(c0 * x0[i] + ct * xt[i]);
  return {std::move(mean), sched.posterior_variance(t)};
}

Tensor ddpm_step(const Tensor& xt, int t, const Tensor& eps_hat, const Tensor& z, const NoiseSchedule& sched) {
  require_same_shape(xt, eps_hat, "ddpm_step eps_hat");
  require_same_shape(xt, z, "ddpm_step z");
  const double alpha = sched.alpha(t);
  if (t == 1) {
    require(std::all_of(z.data().begin(), z.data().end(), [](float v) { return v == 0.0f; }),
            Errc::NonZeroFinalNoise, "z must be zero at t = 1");
  }
  const double eps_coef = (1.0 - alpha) / std::sqrt(1.0 - sched.alpha_bar(t));
  const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
  const double sigma = std::sqrt(sched.posterior_variance(t));
  Tensor out(xt.shape());
  for (std::size_t i = 0; i < xt.size(); ++i)
    out[i] = static_cast<float>((xt[i] - eps_coef * eps_hat[i]) * inv_sqrt_alpha + sigma * z[i]);
  return out;
}

std::vector<StepCoefficients> ddpm_coefficients(const NoiseSchedule& sched) {
  std::vector<StepCoefficients> table;
  table.reserve(static_cast<std::size_t>(sched.steps()));
  for (int t = sched.steps(); t >= 1; --t) {
    const double alpha = sched.alpha(t);
    table.push_back({t, t - 1, 1.0 / std::sqrt(alpha),
                     -(1.0 - alpha) / (std::sqrt(1.0 - sched.alpha_bar(t)) * std::sqrt(alpha)),
                     std::sqrt(sched.posterior_variance(t))});
  }
  return table;
}

std::vector<int> ddim_timesteps(int total_steps, int steps) {
  require(steps >= 1 && steps <= total_steps, Errc::BadSubsequence,
          "DDIM steps must be in [1, T], got " + std::to_string(steps));
  if (steps == 1) {
    require(total_steps == 1, Errc::BadSubsequence, "a one-step subsequence cannot contain both 1 and T");
    return {1};
  }
  std::vector<int> taus(static_cast<std::size_t>(steps));
  const long span = total_steps - 1, gaps = steps - 1;
  for (long i = 0; i < steps; ++i) taus[static_cast<std::size_t>(i)] = static_cast<int>(1 + (i * span + gaps / 2) / gaps);
  for (std::size_t i = 1; i < taus.size(); ++i)
    require(taus[i] > taus[i - 1], Errc::BadSubsequence, "DDIM subsequence not strictly increasing");
  return taus;
}

std::vector<StepCoefficients> ddim_coefficients(const NoiseSchedule& sched, const SamplerConfig& cfg) {
  require(cfg.eta >= 0.0 && cfg.eta <= 1.0, Errc::Precondition, "DDIM eta must be in [0, 1]");
  const auto taus = ddim_timesteps(sched.steps(), cfg.steps);
  std::vector<StepCoefficients> table;
  table.reserve(taus.size());
  for (std::size_t i = taus.size(); i-- > 0;) {
    const int t = taus[i];
    const int t_prev = i == 0 ? 0 : taus[i - 1];
    const double ab = sched.alpha_bar(t), ab_prev = sched.alpha_bar(t_prev);
    const double sigma = cfg.eta * std::sqrt((1.0 - ab_prev) / (1.0 - ab)) * std::sqrt(1.0 - ab / ab_prev);
    const double direction = std::sqrt(std::max(0.0, 1.0 - ab_prev - sigma * sigma));
    const double x_coef = std::sqrt(ab_prev) / std::sqrt(ab);
    table.push_back({t, t_prev, x_coef, direction - x_coef * std::sqrt(1.0 - ab), sigma});
  }
  return table;
}

Tensor ddpm_sample(const EpsilonPredictor& model, std::size_t n, const Shape& shape, const NoiseSchedule& sched,
                   RngStream& rng) {
  require(n >= 1, Errc::Precondition, "sample count must be positive");
  return ddpm_sample_from(model, gaussian_sample(rng, batch_shape(n, shape)), sched, rng);
}

Tensor ddpm_sample_from(const EpsilonPredictor& model, Tensor x, const NoiseSchedule& sched, RngStream& rng) {
  const std::size_t n = x.dim(0);
  for (int t = sched.steps(); t >= 1; --t) {
    const auto steps = repeat_step(n, t);
    const Tensor eps_hat = model.predict(x, steps);
    const Tensor z = t > 1 ? gaussian_sample(rng, x.shape()) : Tensor(x.shape());
    x = ddpm_step(x, t, eps_hat, z, sched);
  }
  return x;
}

Tensor ddim_sample(const EpsilonPredictor& model, std::size_t n, const Shape& shape, const NoiseSchedule& sched,
                   const SamplerConfig& cfg, RngStream& rng) {
  require(n >= 1, Errc::Precondition, "sample count must be positive");
  return ddim_sample_from(model, gaussian_sample(rng, batch_shape(n, shape)), sched, cfg, rng);
}

Tensor ddim_sample_from(const EpsilonPredictor& model, Tensor x, const NoiseSchedule& sched,
                        const SamplerConfig& cfg, RngStream& rng) {
  require(cfg.kind == SamplerKind::ddim, Errc::Precondition, "ddim_sample needs a ddim config");
  const std::size_t n = x.dim(0);
  for (const auto& c : ddim_coefficients(sched, cfg)) {
    const auto steps = repeat_step(n, c.t);
    const Tensor eps_hat = model.predict(x, steps);
    if (c.sigma > 0.0) {
      const Tensor z = gaussian_sample(rng, x.shape());
      x = apply_coefficients(x, eps_hat, c, &z);
    } else {
      x = apply_coefficients(x, eps_hat, c, nullptr);
    }
  }
  return x;
}

Tensor sample(const EpsilonPredictor& model, std::size_t n, const Shape& shape, const NoiseSchedule& sched,
              const SamplerConfig& cfg, RngStream& rng) {
  return cfg.kind == SamplerKind::ddpm ? ddpm_sample(model, n, shape, sched, rng)
                                       : ddim_sample(model, n, shape, sched, cfg, rng);
}

LossResult simple_loss(const EpsilonPredictor& model, const Tensor& x0, std::span<const int> steps,
                       const Tensor& eps, const NoiseSchedule& sched) {
  const Tensor xt = forward_sample_batch(x0, steps, eps, sched);
  const Tensor eps_hat = model.predict(xt, steps);
  require_same_shape(eps_hat, eps, "simple_loss prediction");
  Tensor residual(eps.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double r = static_cast<double>(eps_hat[i]) - eps[i];
    residual[i] = static_cast<float>(r);
    total += r * r;
  }
  return {total / static_cast<double>(x0.dim(0)), std::move(residual)};
}

double ElboTerms::total() const {
  double s = prior_kl + decoder_nll;
  for (double v : step_kl) s += v;
  return s;
}

ElboTerms elbo_terms(const EpsilonPredictor& model, const Tensor& x0, const NoiseSchedule& sched, RngStream& rng) {
  require(x0.rank() >= 2, Errc::ShapeMismatch, "elbo_terms expects an N×… batch");
  const std::size_t n = x0.dim(0);
  const int T = sched.steps();
  ElboTerms terms;
  terms.dims = x0.row_size();

  // L_T: KL(N(√ᾱ_T x0, 1 − ᾱ_T) ‖ N(0, 1)) per element.
  const double ab_T = sched.alpha_bar(T);
  double prior = 0.0;
  for (float v : x0.data()) prior += 0.5 * (ab_T * v * v + (1.0 - ab_T) - 1.0 - std::log(1.0 - ab_T));
  terms.prior_kl = prior / static_cast<double>(n);

  terms.step_kl.reserve(static_cast<std::size_t>(std::max(0, T - 1)));
  for (int t = 2; t <= T; ++t) {
    const Tensor eps = gaussian_sample(rng, x0.shape());
    const Tensor xt = forward_sample(x0, t, eps, sched);
    const Posterior post = posterior_params(x0, xt, t, sched);
    const Tensor eps_hat = model.predict(xt, repeat_step(n, t));
    const auto mu = model_mean(xt, eps_hat, t, sched);
    double kl = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const double diff = static_cast<double>(post.mean[i]) - mu[i];
      kl += diff * diff;
    }
    terms.step_kl.push_back(kl / (2.0 * post.variance) / static_cast<double>(n));
  }

  // L_0: −log N(x0; μ_θ(x_1, 1), β̃_1 floored).
  const Tensor eps = gaussian_sample(rng, x0.shape());
  const Tensor x1 = forward_sample(x0, 1, eps, sched);
  const auto mu = model_mean(x1, model.predict(x1, repeat_step(n, 1)), 1, sched);
  const double var = std::max(sched.posterior_variance(1), kDecoderVarianceFloor);
  double nll = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double diff = x0[i] - mu[i];
    nll += 0.5 * (diff * diff / var + std::log(2.0 * std::numbers::pi * var));
  }
  terms.decoder_nll = nll / static_cast<double>(n);
  return terms;
}

}  // namespace diffc
