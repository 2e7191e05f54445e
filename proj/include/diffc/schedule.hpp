#pragma once

#include <vector>

namespace diffc {

/// β, α and ᾱ tables for a T-step forward process. Steps are 1-based;
/// alpha_bar(0) is defined as 1 so t = 1 formulas need no special case.
class NoiseSchedule {
 public:
  /// β_t linear from beta_start (t = 1) to beta_end (t = T).
  static NoiseSchedule linear(int steps, double beta_start, double beta_end);
  /// Arbitrary β table, each entry in (0, 1).
  static NoiseSchedule from_betas(std::vector<double> betas);

  int steps() const noexcept { return static_cast<int>(beta_.size()); }
  double beta(int t) const { return beta_.at(index(t)); }
  double alpha(int t) const { return alpha_.at(index(t)); }
  double alpha_bar(int t) const;
  /// β̃_t = β_t (1 − ᾱ_{t−1}) / (1 − ᾱ_t); zero at t = 1.
  double posterior_variance(int t) const;

  const std::vector<double>& betas() const noexcept { return beta_; }
  const std::vector<double>& alphas() const noexcept { return alpha_; }
  const std::vector<double>& alpha_bars() const noexcept { return alpha_bar_; }

 private:
  explicit NoiseSchedule(std::vector<double> betas);
  std::size_t index(int t) const;

  std::vector<double> beta_;
  std::vector<double> alpha_;
  std::vector<double> alpha_bar_;
};

inline constexpr int kDefaultSteps = 1000;
inline constexpr double kDefaultBetaStart = 1e-4;
inline constexpr double kDefaultBetaEnd = 0.02;

inline NoiseSchedule default_schedule() {
  return NoiseSchedule::linear(kDefaultSteps, kDefaultBetaStart, kDefaultBetaEnd);
}

}  // namespace diffc
