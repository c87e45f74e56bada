#pragma once

#include <cstddef>
#include <vector>

#include "hitrank/params.hpp"
#include "hitrank/tensor.hpp"

namespace hitrank {

/// Handle to a node owned by one Tape. Only valid for the tape that made it.
struct Var {
  std::size_t index = 0;
};

/// Reverse-mode differentiation tape over coarse tensor operations.
///
/// Build a computation by chaining op calls, then call backward() on a
/// scalar root. Gradients flow into Parameter::grad by accumulation, so
/// callers zero grads between steps. param() deduplicates by address:
/// registering the same Parameter twice yields the same Var, which is what
/// makes two network legs share weights literally rather than by copy.
///
/// A Tape is single-use per training step; values are captured at node
/// creation time and do not track later parameter updates.
class Tape {
 public:
  Var constant(Tensor value);
  Var param(Parameter& p);

  /// y = x * w + b for x [B,I], w [I,O], b [O]; result [B,O].
  Var dense(Var x, Var w, Var b);

  /// Valid (no padding) 2-d cross-correlation plus per-filter bias.
  /// x [B,C,H,W], k [F,C,kH,kW], b [F]; result [B,F,OH,OW] with
  /// OH = (H-kH)/stride_h + 1, OW = (W-kW)/stride_w + 1.
  Var conv2d(Var x, Var k, Var b, std::size_t stride_h, std::size_t stride_w);

  /// Valid max pooling over x [B,C,H,W]. Ties take the earliest
  /// (row-major) position in the window.
  Var max_pool(Var x, std::size_t win_h, std::size_t win_w,
               std::size_t stride_h, std::size_t stride_w);

  Var relu(Var x);

  /// [B, d1, ..., dk] -> [B, d1*...*dk]; requires rank >= 2.
  Var flatten2(Var x);

  /// [B, 1] -> [B].
  Var squeeze_cols(Var x);

  /// Elementwise a*x + b*y over same-shaped operands.
  Var affine(double a, Var x, double b, Var y);

  Var scale(Var x, double a);

  /// Mean squared error of scores [n] against fixed targets [n]; scalar.
  Var mse(Var scores, const Tensor& targets);

  /// Pairwise hinge (1/P) * sum_p max(0, margin - delta_p * (si_p - sj_p))
  /// over score vectors si, sj of length P. delta_p is +1 or -1; a pair is
  /// active (and carries gradient) only while its hinge term is strictly
  /// positive.
  Var rank_hinge(Var si, Var sj, const std::vector<double>& delta,
                 double margin);

  const Tensor& value(Var v) const;
  double scalar_value(Var v) const;
  std::size_t node_count() const noexcept { return nodes_.size(); }

  /// Reverse sweep from a scalar root. Accumulates into Parameter::grad
  /// for every parameter reachable from the root.
  void backward(Var root);

 private:
  enum class Op {
    kConstant,
    kParam,
    kDense,
    kConv2d,
    kMaxPool,
    kRelu,
    kFlatten2,
    kSqueezeCols,
    kAffine,
    kScale,
    kMse,
    kRankHinge,
  };

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  struct Node {
    Op op;
    Tensor value;
    std::size_t in0 = kNone;
    std::size_t in1 = kNone;
    std::size_t in2 = kNone;
    Parameter* param = nullptr;
    std::vector<std::size_t> argmax;  // max_pool: winning input flat index
    std::vector<double> aux;          // mse: targets; rank_hinge: deltas
    double c0 = 0.0;                  // affine a / scale a / hinge margin
    double c1 = 0.0;                  // affine b
    std::size_t s0 = 0, s1 = 0;       // pool window h,w
    std::size_t s2 = 0, s3 = 0;       // strides h,w
  };

  const Node& node(Var v) const;
  Var push(Node n);

  std::vector<Node> nodes_;
  std::vector<std::pair<const Parameter*, std::size_t>> param_nodes_;
};

}  // namespace hitrank
