#include "diffc/schedule.hpp"

#include "diffc/error.hpp"

namespace diffc {

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : beta_(std::move(betas)) {
  require(!beta_.empty(), Errc::BadRange, "schedule needs at least one step");
  alpha_.reserve(beta_.size());
  alpha_bar_.reserve(beta_.size());
  double running = 1.0;
  for (double b : beta_) {
    require(b > 0.0 && b < 1.0, Errc::BadRange, "beta must lie in (0, 1)");
    const double a = 1.0 - b;
    running *= a;
    alpha_.push_back(a);
    alpha_bar_.push_back(running);
  }
}

NoiseSchedule NoiseSchedule::linear(int steps, double beta_start, double beta_end) {
  require(steps >= 1, Errc::BadRange, "schedule needs T >= 1");
  require(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0, Errc::BadRange,
          "need 0 < beta_start <= beta_end < 1");
  std::vector<double> betas(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(t) / static_cast<double>(steps - 1);
    betas[static_cast<std::size_t>(t)] = beta_start + (beta_end - beta_start) * frac;
  }
  return NoiseSchedule(std::move(betas));
}

NoiseSchedule NoiseSchedule::from_betas(std::vector<double> betas) { return NoiseSchedule(std::move(betas)); }

std::size_t NoiseSchedule::index(int t) const {
  require(t >= 1 && t <= steps(), Errc::StepOutOfRange,
          "step " + std::to_string(t) + " outside [1, " + std::to_string(steps()) + "]");
  return static_cast<std::size_t>(t - 1);
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t == 0) return 1.0;
  return alpha_bar_.at(index(t));
}

double NoiseSchedule::posterior_variance(int t) const {
  return beta(t) * (1.0 - alpha_bar(t - 1)) / (1.0 - alpha_bar(t));
}

}  // namespace diffc
