#include "hitrank/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hitrank {

namespace {

std::size_t checked_numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) {
    if (e == 0) {
      throw std::invalid_argument("Tensor: zero extent in shape");
    }
    n *= e;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), values_(checked_numel(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (checked_numel(shape_) != values_.size()) {
    throw std::invalid_argument(
        "Tensor: shape/value count mismatch (shape wants " +
        std::to_string(checked_numel(shape_)) + ", got " +
        std::to_string(values_.size()) + " values)");
  }
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::zeros_like(const Tensor& other) { return Tensor(other.shape_); }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw std::out_of_range("Tensor::dim: axis out of range");
  }
  return shape_[axis];
}

bool Tensor::all_finite() const noexcept {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::fill(double v) {
  for (double& x : values_) x = v;
}

void Tensor::reshape(std::vector<std::size_t> shape) {
  if (checked_numel(shape) != values_.size()) {
    throw std::invalid_argument("Tensor::reshape: element count change");
  }
  shape_ = std::move(shape);
}

}  // namespace hitrank
