#include "hitrank/optim.hpp"

#include <stdexcept>

namespace hitrank {

SgdOptimizer::SgdOptimizer(double lr, double momentum)
    : lr_(lr), momentum_(momentum) {
  if (!(lr > 0.0)) {
    throw std::invalid_argument("SgdOptimizer: lr must be positive");
  }
  if (momentum < 0.0 || momentum >= 1.0) {
    throw std::invalid_argument("SgdOptimizer: momentum must be in [0, 1)");
  }
}

void SgdOptimizer::step(ParamSet& params) {
  if (velocity_.empty()) {
    velocity_.reserve(params.size());
    for (const auto& p : params) {
      velocity_.push_back(Tensor::zeros_like(p.value));
    }
  }
  if (velocity_.size() != params.size()) {
    throw std::invalid_argument("SgdOptimizer: ParamSet changed size");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = params[k];
    Tensor& v = velocity_[k];
    if (!v.same_shape(p.value)) {
      throw std::invalid_argument("SgdOptimizer: parameter shape changed");
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = momentum_ * v[i] + p.grad[i];
      p.value[i] -= lr_ * v[i];
    }
  }
}

}  // namespace hitrank
