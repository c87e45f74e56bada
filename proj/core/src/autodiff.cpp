#include "hitrank/autodiff.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hitrank {

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw std::invalid_argument("Tape: " + what);
}

}  // namespace

const Tape::Node& Tape::node(Var v) const {
  if (v.index >= nodes_.size()) fail("Var from a different tape");
  return nodes_[v.index];
}

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::constant(Tensor value) {
  if (value.empty()) fail("constant: empty tensor");
  Node n;
  n.op = Op::kConstant;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::param(Parameter& p) {
  for (const auto& [ptr, idx] : param_nodes_) {
    if (ptr == &p) return Var{idx};
  }
  Node n;
  n.op = Op::kParam;
  n.value = p.value;
  n.param = &p;
  Var v = push(std::move(n));
  param_nodes_.emplace_back(&p, v.index);
  return v;
}

Var Tape::dense(Var xv, Var wv, Var bv) {
  const Tensor& x = node(xv).value;
  const Tensor& w = node(wv).value;
  const Tensor& b = node(bv).value;
  if (x.rank() != 2 || w.rank() != 2 || b.rank() != 1) {
    fail("dense: expects x [B,I], w [I,O], b [O]");
  }
  if (x.dim(1) != w.dim(0)) fail("dense: inner extents differ");
  if (b.dim(0) != w.dim(1)) fail("dense: bias extent differs from output");
  const std::size_t B = x.dim(0), I = x.dim(1), O = w.dim(1);

  Node n;
  n.op = Op::kDense;
  n.in0 = xv.index;
  n.in1 = wv.index;
  n.in2 = bv.index;
  n.value = Tensor({B, O});
  for (std::size_t r = 0; r < B; ++r) {
    for (std::size_t o = 0; o < O; ++o) {
      double acc = b[o];
      for (std::size_t i = 0; i < I; ++i) acc += x.at(r, i) * w.at(i, o);
      n.value.at(r, o) = acc;
    }
  }
  return push(std::move(n));
}

Var Tape::conv2d(Var xv, Var kv, Var bv, std::size_t stride_h,
                 std::size_t stride_w) {
  const Tensor& x = node(xv).value;
  const Tensor& k = node(kv).value;
  const Tensor& b = node(bv).value;
  if (x.rank() != 4 || k.rank() != 4 || b.rank() != 1) {
    fail("conv2d: expects x [B,C,H,W], k [F,C,kH,kW], b [F]");
  }
  if (stride_h == 0 || stride_w == 0) fail("conv2d: zero stride");
  if (x.dim(1) != k.dim(1)) fail("conv2d: channel counts differ");
  if (b.dim(0) != k.dim(0)) fail("conv2d: bias extent differs from filters");
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t F = k.dim(0), KH = k.dim(2), KW = k.dim(3);
  if (H < KH || W < KW) fail("conv2d: kernel larger than input");
  const std::size_t OH = (H - KH) / stride_h + 1;
  const std::size_t OW = (W - KW) / stride_w + 1;

  Node n;
  n.op = Op::kConv2d;
  n.in0 = xv.index;
  n.in1 = kv.index;
  n.in2 = bv.index;
  n.s2 = stride_h;
  n.s3 = stride_w;
  n.value = Tensor({B, F, OH, OW});
  for (std::size_t bi = 0; bi < B; ++bi) {
    for (std::size_t f = 0; f < F; ++f) {
      for (std::size_t oy = 0; oy < OH; ++oy) {
        for (std::size_t ox = 0; ox < OW; ++ox) {
          double acc = b[f];
          for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t ky = 0; ky < KH; ++ky) {
              const std::size_t y = oy * stride_h + ky;
              for (std::size_t kx = 0; kx < KW; ++kx) {
                acc += x.at(bi, c, y, ox * stride_w + kx) * k.at(f, c, ky, kx);
              }
            }
          }
          n.value.at(bi, f, oy, ox) = acc;
        }
      }
    }
  }
  return push(std::move(n));
}

Var Tape::max_pool(Var xv, std::size_t win_h, std::size_t win_w,
                   std::size_t stride_h, std::size_t stride_w) {
  const Tensor& x = node(xv).value;
  if (x.rank() != 4) fail("max_pool: expects x [B,C,H,W]");
  if (win_h == 0 || win_w == 0) fail("max_pool: zero window");
  if (stride_h == 0 || stride_w == 0) fail("max_pool: zero stride");
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (H < win_h || W < win_w) fail("max_pool: window larger than input");
  const std::size_t OH = (H - win_h) / stride_h + 1;
  const std::size_t OW = (W - win_w) / stride_w + 1;

  Node n;
  n.op = Op::kMaxPool;
  n.in0 = xv.index;
  n.s0 = win_h;
  n.s1 = win_w;
  n.s2 = stride_h;
  n.s3 = stride_w;
  n.value = Tensor({B, C, OH, OW});
  n.argmax.resize(B * C * OH * OW);
  std::size_t out = 0;
  for (std::size_t bi = 0; bi < B; ++bi) {
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t oy = 0; oy < OH; ++oy) {
        for (std::size_t ox = 0; ox < OW; ++ox) {
          double best = x.at(bi, c, oy * stride_h, ox * stride_w);
          std::size_t best_flat =
              ((bi * C + c) * H + oy * stride_h) * W + ox * stride_w;
          for (std::size_t wy = 0; wy < win_h; ++wy) {
            const std::size_t y = oy * stride_h + wy;
            for (std::size_t wx = 0; wx < win_w; ++wx) {
              const std::size_t xx = ox * stride_w + wx;
              const double v = x.at(bi, c, y, xx);
              if (v > best) {
                best = v;
                best_flat = ((bi * C + c) * H + y) * W + xx;
              }
            }
          }
          n.value[out] = best;
          n.argmax[out] = best_flat;
          ++out;
        }
      }
    }
  }
  return push(std::move(n));
}

Var Tape::relu(Var xv) {
  const Tensor& x = node(xv).value;
  Node n;
  n.op = Op::kRelu;
  n.in0 = xv.index;
  n.value = x;
  for (double& v : n.value.values()) v = std::max(v, 0.0);
  return push(std::move(n));
}

Var Tape::flatten2(Var xv) {
  const Tensor& x = node(xv).value;
  if (x.rank() < 2) fail("flatten2: expects rank >= 2");
  Node n;
  n.op = Op::kFlatten2;
  n.in0 = xv.index;
  n.value = x;
  n.value.reshape({x.dim(0), x.size() / x.dim(0)});
  return push(std::move(n));
}

Var Tape::squeeze_cols(Var xv) {
  const Tensor& x = node(xv).value;
  if (x.rank() != 2 || x.dim(1) != 1) fail("squeeze_cols: expects [B,1]");
  Node n;
  n.op = Op::kSqueezeCols;
  n.in0 = xv.index;
  n.value = x;
  n.value.reshape({x.dim(0)});
  return push(std::move(n));
}

Var Tape::affine(double a, Var xv, double b, Var yv) {
  const Tensor& x = node(xv).value;
  const Tensor& y = node(yv).value;
  if (!x.same_shape(y)) fail("affine: operand shapes differ");
  Node n;
  n.op = Op::kAffine;
  n.in0 = xv.index;
  n.in1 = yv.index;
  n.c0 = a;
  n.c1 = b;
  n.value = Tensor(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    n.value[i] = a * x[i] + b * y[i];
  }
  return push(std::move(n));
}

Var Tape::scale(Var xv, double a) {
  const Tensor& x = node(xv).value;
  Node n;
  n.op = Op::kScale;
  n.in0 = xv.index;
  n.c0 = a;
  n.value = x;
  for (double& v : n.value.values()) v *= a;
  return push(std::move(n));
}

Var Tape::mse(Var sv, const Tensor& targets) {
  const Tensor& s = node(sv).value;
  if (s.rank() != 1 || targets.rank() != 1) fail("mse: expects vectors");
  if (s.dim(0) != targets.dim(0)) fail("mse: length mismatch");
  const std::size_t m = s.dim(0);
  Node n;
  n.op = Op::kMse;
  n.in0 = sv.index;
  n.aux = targets.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = s[i] - n.aux[i];
    acc += d * d;
  }
  n.value = Tensor::scalar(acc / static_cast<double>(m));
  return push(std::move(n));
}

Var Tape::rank_hinge(Var siv, Var sjv, const std::vector<double>& delta,
                     double margin) {
  const Tensor& si = node(siv).value;
  const Tensor& sj = node(sjv).value;
  if (si.rank() != 1 || sj.rank() != 1) fail("rank_hinge: expects vectors");
  if (si.dim(0) != sj.dim(0) || si.dim(0) != delta.size()) {
    fail("rank_hinge: length mismatch");
  }
  for (double d : delta) {
    if (d != 1.0 && d != -1.0) fail("rank_hinge: delta entries must be +-1");
  }
  const std::size_t p = delta.size();
  Node n;
  n.op = Op::kRankHinge;
  n.in0 = siv.index;
  n.in1 = sjv.index;
  n.aux = delta;
  n.c0 = margin;
  double acc = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    acc += std::max(0.0, margin - delta[i] * (si[i] - sj[i]));
  }
  n.value = Tensor::scalar(acc / static_cast<double>(p));
  return push(std::move(n));
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

double Tape::scalar_value(Var v) const {
  const Tensor& t = node(v).value;
  if (t.size() != 1) fail("scalar_value: node is not scalar");
  return t[0];
}

void Tape::backward(Var root) {
  const Node& r = node(root);
  if (r.value.size() != 1) fail("backward: root must be scalar");

  std::vector<Tensor> g(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    g[i] = Tensor::zeros_like(nodes_[i].value);
  }
  g[root.index][0] = 1.0;

  for (std::size_t pos = root.index + 1; pos-- > 0;) {
    const Node& n = nodes_[pos];
    const Tensor& gy = g[pos];
    switch (n.op) {
      case Op::kConstant:
        break;
      case Op::kParam: {
        Tensor& pg = n.param->grad;
        for (std::size_t i = 0; i < gy.size(); ++i) pg[i] += gy[i];
        break;
      }
      case Op::kDense: {
        const Tensor& x = nodes_[n.in0].value;
        const Tensor& w = nodes_[n.in1].value;
        Tensor& gx = g[n.in0];
        Tensor& gw = g[n.in1];
        Tensor& gb = g[n.in2];
        const std::size_t B = x.dim(0), I = x.dim(1), O = w.dim(1);
        for (std::size_t r2 = 0; r2 < B; ++r2) {
          for (std::size_t o = 0; o < O; ++o) {
            const double go = gy.at(r2, o);
            gb[o] += go;
            for (std::size_t i = 0; i < I; ++i) {
              gx.at(r2, i) += go * w.at(i, o);
              gw.at(i, o) += go * x.at(r2, i);
            }
          }
        }
        break;
      }
      case Op::kConv2d: {
        const Tensor& x = nodes_[n.in0].value;
        const Tensor& k = nodes_[n.in1].value;
        Tensor& gx = g[n.in0];
        Tensor& gk = g[n.in1];
        Tensor& gb = g[n.in2];
        const std::size_t B = x.dim(0), C = x.dim(1);
        const std::size_t F = k.dim(0), KH = k.dim(2), KW = k.dim(3);
        const std::size_t OH = n.value.dim(2), OW = n.value.dim(3);
        for (std::size_t bi = 0; bi < B; ++bi) {
          for (std::size_t f = 0; f < F; ++f) {
            for (std::size_t oy = 0; oy < OH; ++oy) {
              for (std::size_t ox = 0; ox < OW; ++ox) {
                const double go = gy.at(bi, f, oy, ox);
                gb[f] += go;
                for (std::size_t c = 0; c < C; ++c) {
                  for (std::size_t ky = 0; ky < KH; ++ky) {
                    const std::size_t y = oy * n.s2 + ky;
                    for (std::size_t kx = 0; kx < KW; ++kx) {
                      const std::size_t xx = ox * n.s3 + kx;
                      gx.at(bi, c, y, xx) += go * k.at(f, c, ky, kx);
                      gk.at(f, c, ky, kx) += go * x.at(bi, c, y, xx);
                    }
                  }
                }
              }
            }
          }
        }
        break;
      }
      case Op::kMaxPool: {
        Tensor& gx = g[n.in0];
        for (std::size_t i = 0; i < n.argmax.size(); ++i) {
          gx[n.argmax[i]] += gy[i];
        }
        break;
      }
      case Op::kRelu: {
        const Tensor& x = nodes_[n.in0].value;
        Tensor& gx = g[n.in0];
        for (std::size_t i = 0; i < gy.size(); ++i) {
          if (x[i] > 0.0) gx[i] += gy[i];
        }
        break;
      }
      case Op::kFlatten2:
      case Op::kSqueezeCols: {
        Tensor& gx = g[n.in0];
        for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
        break;
      }
      case Op::kAffine: {
        Tensor& gx = g[n.in0];
        Tensor& gyv = g[n.in1];
        for (std::size_t i = 0; i < gy.size(); ++i) {
          gx[i] += n.c0 * gy[i];
          gyv[i] += n.c1 * gy[i];
        }
        break;
      }
      case Op::kScale: {
        Tensor& gx = g[n.in0];
        for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += n.c0 * gy[i];
        break;
      }
      case Op::kMse: {
        const Tensor& s = nodes_[n.in0].value;
        Tensor& gs = g[n.in0];
        const double go = gy[0];
        const double inv = 2.0 / static_cast<double>(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
          gs[i] += go * inv * (s[i] - n.aux[i]);
        }
        break;
      }
      case Op::kRankHinge: {
        const Tensor& si = nodes_[n.in0].value;
        const Tensor& sj = nodes_[n.in1].value;
        Tensor& gi = g[n.in0];
        Tensor& gj = g[n.in1];
        const double go = gy[0];
        const double inv = 1.0 / static_cast<double>(n.aux.size());
        for (std::size_t i = 0; i < n.aux.size(); ++i) {
          if (n.c0 - n.aux[i] * (si[i] - sj[i]) > 0.0) {
            gi[i] -= go * inv * n.aux[i];
            gj[i] += go * inv * n.aux[i];
          }
        }
        break;
      }
    }
  }
}

}  // namespace hitrank
