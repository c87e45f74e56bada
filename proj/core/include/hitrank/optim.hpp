#pragma once

#include <vector>

#include "hitrank/params.hpp"

namespace hitrank {

/// Stochastic gradient descent with classical momentum:
///   v <- momentum * v + grad
///   w <- w - lr * v
///
/// Velocity slots are keyed by position in the ParamSet, which must keep
/// the same entries (and shapes) across steps.
class SgdOptimizer {
 public:
  explicit SgdOptimizer(double lr = 1e-3, double momentum = 0.9);

  double lr() const noexcept { return lr_; }
  double momentum() const noexcept { return momentum_; }

  void step(ParamSet& params);

 private:
  double lr_;
  double momentum_;
  std::vector<Tensor> velocity_;
};

}  // namespace hitrank
