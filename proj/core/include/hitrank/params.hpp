#pragma once

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hitrank/tensor.hpp"

namespace hitrank {

/// One named weight/bias tensor and its gradient accumulator.
/// grad always matches value's shape.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// Named collection of parameters with stable (insertion) iteration order.
/// References returned by add/at/operator[] stay valid while the set
/// lives; later insertions never move existing entries.
///
/// The binary checkpoint format preserves order and values bit-exactly:
///   magic "HRPS" | u32 version | u32 count
///   per entry: u32 name_len | name | u32 rank | u64 extents | f64 values
/// All integers and doubles little-endian.
class ParamSet {
 public:
  Parameter& add(std::string name, Tensor init);

  bool contains(std::string_view name) const noexcept;
  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;

  std::size_t size() const noexcept { return entries_.size(); }
  Parameter& operator[](std::size_t i) { return entries_[i]; }
  const Parameter& operator[](std::size_t i) const { return entries_[i]; }

  auto begin() noexcept { return entries_.begin(); }
  auto end() noexcept { return entries_.end(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  /// Total number of scalar values across all parameters.
  std::size_t value_count() const noexcept;

  void zero_grad() noexcept;

  void save(std::ostream& out) const;
  static ParamSet load(std::istream& in);

  void save_file(const std::string& path) const;
  static ParamSet load_file(const std::string& path);

 private:
  // Deque keeps element addresses stable across add() so handed-out
  // Parameter references survive later insertions.
  std::deque<Parameter> entries_;
};

}  // namespace hitrank
