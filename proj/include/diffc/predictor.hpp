#pragma once

#include <span>

#include "diffc/tensor.hpp"

namespace diffc {

/// ε_θ(x_t, t): predicts the injected noise for a batch. `xt` is N×…,
/// `steps` holds one timestep per row; the output has the shape of `xt`.
class EpsilonPredictor {
 public:
  virtual ~EpsilonPredictor() = default;
  virtual Tensor predict(const Tensor& xt, std::span<const int> steps) const = 0;
};

/// Always predicts zero noise; the baseline every real predictor must beat.
class ZeroPredictor final : public EpsilonPredictor {
 public:
  Tensor predict(const Tensor& xt, std::span<const int> steps) const override;
};

}  // namespace diffc
