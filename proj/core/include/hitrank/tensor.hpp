#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace hitrank {

/// Dense n-dimensional array of doubles in row-major order.
///
/// Shape extents are all positive; product(shape) == stored value count.
/// Plain value type: copy/move freely, safe to hand between threads.
class Tensor {
 public:
  Tensor() noexcept = default;

  /// Zero-filled tensor of the given shape.
  explicit Tensor(std::vector<std::size_t> shape);

  /// Tensor adopting `values`; rejects shape/value-count mismatch.
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor scalar(double v);
  static Tensor zeros_like(const Tensor& other);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }
  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  double& operator[](std::size_t flat) { return values_[flat]; }
  double operator[](std::size_t flat) const { return values_[flat]; }

  // Row-major index helpers for the ranks this codebase uses.
  double& at(std::size_t i, std::size_t j) {
    return values_[i * shape_[1] + j];
  }
  double at(std::size_t i, std::size_t j) const {
    return values_[i * shape_[1] + j];
  }
  double& at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) {
    return values_[((b * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
  }
  double at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
    return values_[((b * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
  }

  bool same_shape(const Tensor& other) const noexcept {
    return shape_ == other.shape_;
  }

  bool all_finite() const noexcept;

  void fill(double v);

  /// In-place reshape; product of extents must be preserved.
  void reshape(std::vector<std::size_t> shape);

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

}  // namespace hitrank
