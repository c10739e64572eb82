#ifndef SIGAT_AUTOGRAD_HPP
#define SIGAT_AUTOGRAD_HPP

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sigat/tensor.hpp"

namespace sigat::ad {

/// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

/// Reverse-mode tape over whole tensors. Ops append nodes in evaluation
/// order; backward() walks them in reverse and accumulates gradients into
/// every node that depends on a parameter. One tape per training step,
/// confined to one thread.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Var constant(Tensor2 value) { return push(std::move(value), false, {}, "constant"); }
  Var parameter(Tensor2 value) { return push(std::move(value), true, {}, "parameter"); }

  const Tensor2& value(Var v) const { return nodes_.at(v.id).value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  /// Gradient of the last backward() target w.r.t. v; zeros if v was unused.
  Tensor2 grad(Var v) const {
    const Node& n = nodes_.at(v.id);
    return n.grad.size() ? n.grad : Tensor2(n.value.rows(), n.value.cols());
  }

  std::size_t size() const { return nodes_.size(); }

  void backward(Var loss) {
    if (value(loss).size() != 1) throw NumericError("backward: loss must be a scalar");
    for (Node& n : nodes_) n.grad = Tensor2();
    grad_ref(loss.id) = Tensor2::scalar(1.0);
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      Node& n = nodes_[i];
      if (n.backward && n.grad.size()) n.backward(*this, i);
    }
  }

  // -- op plumbing -------------------------------------------------------

  /// Records an op result. `backward` runs only if some input needs a gradient.
  Var record(Tensor2 value, std::initializer_list<Var> inputs, BackwardFn backward, const char* op) {
    bool needs = false;
    for (Var in : inputs) needs |= requires_grad(in);
    return push(std::move(value), needs, needs ? std::move(backward) : BackwardFn{}, op);
  }
  Var record(Tensor2 value, const std::vector<Var>& inputs, BackwardFn backward, const char* op) {
    bool needs = false;
    for (Var in : inputs) needs |= requires_grad(in);
    return push(std::move(value), needs, needs ? std::move(backward) : BackwardFn{}, op);
  }

  const Tensor2& out_grad(std::size_t self) const { return nodes_[self].grad; }

  /// Mutable gradient accumulator for an input, or nullptr if it needs none.
  Tensor2* accumulator(Var v) {
    if (!nodes_[v.id].requires_grad) return nullptr;
    return &grad_ref(v.id);
  }

 private:
  struct Node {
    Tensor2 value;
    Tensor2 grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var push(Tensor2 value, bool requires_grad, BackwardFn backward, const char* op) {
    if (!value.all_finite()) throw NumericError(std::string("non-finite value produced by ") + op);
    nodes_.push_back({std::move(value), Tensor2(), requires_grad, std::move(backward)});
    return Var{nodes_.size() - 1};
  }

  Tensor2& grad_ref(std::size_t id) {
    Node& n = nodes_[id];
    if (!n.grad.size()) n.grad = Tensor2(n.value.rows(), n.value.cols());
    return n.grad;
  }

  std::vector<Node> nodes_;
};

using Index = std::vector<std::size_t>;

// ---------------------------------------------------------------------------
// Dense ops

inline Var matmul(Tape& t, Var a, Var b) {
  Tensor2 out = sigat::matmul(t.value(a), t.value(b));
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, std::size_t self) {
    const Tensor2& g = tp.out_grad(self);
    if (Tensor2* ga = tp.accumulator(a)) matmul_nt_acc(g, tp.value(b), *ga);
    if (Tensor2* gb = tp.accumulator(b)) matmul_tn_acc(tp.value(a), g, *gb);
  }, "matmul");
}

inline Var add(Tape& t, Var a, Var b) {
  Tensor2 out = t.value(a);
  add_inplace(out, t.value(b));
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, std::size_t self) {
    const Tensor2& g = tp.out_grad(self);
    if (Tensor2* ga = tp.accumulator(a)) add_inplace(*ga, g);
    if (Tensor2* gb = tp.accumulator(b)) add_inplace(*gb, g);
  }, "add");
}

/// a (n x c) + bias (1 x c) broadcast over rows.
inline Var add_row(Tape& t, Var a, Var bias) {
  const Tensor2& bv = t.value(bias);
  Tensor2 out = t.value(a);
  if (bv.rows() != 1 || bv.cols() != out.cols()) throw NumericError("add_row: bias must be 1 x cols");
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv(0, c);
  return t.record(std::move(out), {a, bias}, [a, bias](Tape& tp, std::size_t self) {
    const Tensor2& g = tp.out_grad(self);
    if (Tensor2* ga = tp.accumulator(a)) add_inplace(*ga, g);
    if (Tensor2* gb = tp.accumulator(bias))
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) (*gb)(0, c) += g(r, c);
  }, "add_row");
}

/// Horizontal concatenation; all parts share the row count.
inline Var concat_cols(Tape& t, const std::vector<Var>& parts) {
  if (parts.empty()) throw NumericError("concat_cols: no inputs");
  const std::size_t rows = t.value(parts[0]).rows();
  std::size_t cols = 0;
  for (Var p : parts) {
    if (t.value(p).rows() != rows) throw NumericError("concat_cols: row mismatch");
    cols += t.value(p).cols();
  }
  Tensor2 out(rows, cols);
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor2& v = t.value(p);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < v.cols(); ++c) out(r, off + c) = v(r, c);
    off += v.cols();
  }
  return t.record(std::move(out), parts, [parts](Tape& tp, std::size_t self) {
    const Tensor2& g = tp.out_grad(self);
    std::size_t o = 0;
    for (Var p : parts) {
      const std::size_t w = tp.value(p).cols();
      if (Tensor2* gp = tp.accumulator(p))
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < w; ++c) (*gp)(r, c) += g(r, o + c);
      o += w;
    }
  }, "concat_cols");
}

/// Rows [r0, r1) of a.
inline Var slice_rows(Tape& t, Var a, std::size_t r0, std::size_t r1) {
  const Tensor2& av = t.value(a);
  if (r0 > r1 || r1 > av.rows()) throw NumericError("slice_rows: range out of bounds");
  Tensor2 out(r1 - r0, av.cols());
  for (std::size_t r = r0; r < r1; ++r)
    for (std::size_t c = 0; c < av.cols(); ++c) out(r - r0, c) = av(r, c);
  return t.record(std::move(out), {a}, [a, r0](Tape& tp, std::size_t self) {
    const Tensor2& g = tp.out_grad(self);
    Tensor2* ga = tp.accumulator(a);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) (*ga)(r0 + r, c) += g(r, c);
  }, "slice_rows");
}

namespace detail {

/// Elementwise op whose derivative is a function of (input, output).
template <typename F, typename D>
Var unary(Tape& t, Var a, F f, D df, const char* name) {
  const Tensor2& av = t.value(a);
  Tensor2 out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i]);
  return t.record(std::move(out), {a}, [a, df](Tape& tp, std::size_t self) {
    const Tensor2& g = tp.out_grad(self);
    const Tensor2& x = tp.value(a);
    const Tensor2& y = tp.value(Var{self});
    Tensor2* ga = tp.accumulator(a);
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * df(x[i], y[i]);
  }, name);
}

}  // namespace detail

inline Var leaky_relu(Tape& t, Var a, double slope) {
  return detail::unary(
      t, a, [slope](double x) { return sigat::leaky_relu(x, slope); },
      [slope](double x, double) { return leaky_relu_grad(x, slope); }, "leaky_relu");
}

inline Var tanh(Tape& t, Var a) {
  return detail::unary(
      t, a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; }, "tanh");
}

inline Var sigmoid(Tape& t, Var a) {
  return detail::unary(
      t, a, [](double x) { return sigat::sigmoid(x); }, [](double, double y) { return y * (1.0 - y); }, "sigmoid");
}

inline Var log(Tape& t, Var a) {
  return detail::unary(
      t, a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; }, "log");
}

/// log(sigmoid(x)), stable for large |x|.
inline Var log_sigmoid(Tape& t, Var a) {
  return detail::unary(
      t, a, [](double x) { return sigat::log_sigmoid(x); },
      [](double x, double) { return sigat::sigmoid(-x); }, "log_sigmoid");
}

/// Elementwise product with a constant tensor of the same shape.
inline Var mul_const(Tape& t, Var a, Tensor2 c) {
  require_same_shape(t.value(a), c, "mul_const");
  Tensor2 out = t.value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c[i];
  return t.record(std::move(out), {a}, [a, c = std::move(c)](Tape& tp, std::size_t self) {
    const Tensor2& g = tp.out_grad(self);
    Tensor2* ga = tp.accumulator(a);
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * c[i];
  }, "mul_const");
}

inline Var scale(Tape& t, Var a, double s) {
  Tensor2 out = t.value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
  return t.record(std::move(out), {a}, [a, s](Tape& tp, std::size_t self) {
    const Tensor2& g = tp.out_grad(self);
    Tensor2* ga = tp.accumulator(a);
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * s;
  }, "scale");
}

/// Sum of all entries, as a 1 x 1 tensor.
inline Var sum(Tape& t, Var a) {
  double s = 0.0;
  for (double x : t.value(a).flat()) s += x;
  return t.record(Tensor2::scalar(s), {a}, [a](Tape& tp, std::size_t self) {
    const double g = tp.out_grad(self)[0];
    Tensor2* ga = tp.accumulator(a);
    for (std::size_t i = 0; i < ga->size(); ++i) (*ga)[i] += g;
  }, "sum");
}

// ---------------------------------------------------------------------------
// Neighbor-list ops

/// out[i] = a[idx[i]]; backward scatter-adds.
inline Var gather_rows(Tape& t, Var a, Index idx) {
  const Tensor2& av = t.value(a);
  Tensor2 out(idx.size(), av.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= av.rows()) throw NumericError("gather_rows: index out of range");
    auto src = av.row(idx[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return t.record(std::move(out), {a}, [a, idx = std::move(idx)](Tape& tp, std::size_t self) {
    const Tensor2& g = tp.out_grad(self);
    Tensor2* ga = tp.accumulator(a);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto dst = ga->row(idx[i]);
      auto src = g.row(i);
      for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
    }
  }, "gather_rows");
}

/// Softmax of an E x 1 logit column within each segment
/// [offsets[s], offsets[s+1]). Empty segments are allowed.
inline Var segment_softmax(Tape& t, Var logits, std::shared_ptr<const Index> offsets) {
  const Tensor2& x = t.value(logits);
  if (x.cols() != 1 || offsets->empty() || offsets->back() != x.rows())
    throw NumericError("segment_softmax: offsets do not cover logits");
  Tensor2 out(x.rows(), 1);
  for (std::size_t s = 0; s + 1 < offsets->size(); ++s) {
    const std::size_t b = (*offsets)[s], e = (*offsets)[s + 1];
    if (b == e) continue;
    auto p = softmax(x.flat().subspan(b, e - b));
    for (std::size_t i = b; i < e; ++i) out[i] = p[i - b];
  }
  return t.record(std::move(out), {logits}, [logits, offsets](Tape& tp, std::size_t self) {
    const Tensor2& g = tp.out_grad(self);
    const Tensor2& y = tp.value(Var{self});
    Tensor2* gx = tp.accumulator(logits);
    for (std::size_t s = 0; s + 1 < offsets->size(); ++s) {
      const std::size_t b = (*offsets)[s], e = (*offsets)[s + 1];
      double inner = 0.0;
      for (std::size_t i = b; i < e; ++i) inner += y[i] * g[i];
      for (std::size_t i = b; i < e; ++i) (*gx)[i] += y[i] * (g[i] - inner);
    }
  }, "segment_softmax");
}

/// out[s] = sum over e in segment s of weights[e] * values[idx[e]].
/// values: R x d, weights: E x 1, idx: E entries, offsets: S + 1 entries.
/// Empty segments yield zero rows.
inline Var segment_weighted_sum(Tape& t, Var values, Var weights, std::shared_ptr<const Index> idx,
                                std::shared_ptr<const Index> offsets) {
  const Tensor2& v = t.value(values);
  const Tensor2& w = t.value(weights);
  if (w.cols() != 1 || w.rows() != idx->size() || offsets->empty() || offsets->back() != idx->size())
    throw NumericError("segment_weighted_sum: inconsistent segments");
  const std::size_t d = v.cols();
  Tensor2 out(offsets->size() - 1, d);
  for (std::size_t s = 0; s + 1 < offsets->size(); ++s) {
    auto o = out.row(s);
    for (std::size_t e = (*offsets)[s]; e < (*offsets)[s + 1]; ++e) {
      if ((*idx)[e] >= v.rows()) throw NumericError("segment_weighted_sum: index out of range");
      auto src = v.row((*idx)[e]);
      for (std::size_t c = 0; c < d; ++c) o[c] += w[e] * src[c];
    }
  }
  return t.record(std::move(out), {values, weights}, [values, weights, idx, offsets](Tape& tp, std::size_t self) {
    const Tensor2& g = tp.out_grad(self);
    const Tensor2& vv = tp.value(values);
    const Tensor2& ww = tp.value(weights);
    Tensor2* gv = tp.accumulator(values);
    Tensor2* gw = tp.accumulator(weights);
    for (std::size_t s = 0; s + 1 < offsets->size(); ++s) {
      auto gs = g.row(s);
      for (std::size_t e = (*offsets)[s]; e < (*offsets)[s + 1]; ++e) {
        const std::size_t r = (*idx)[e];
        if (gw) (*gw)[e] += dot(gs, vv.row(r));
        if (gv) {
          auto dst = gv->row(r);
          for (std::size_t c = 0; c < gs.size(); ++c) dst[c] += ww[e] * gs[c];
        }
      }
    }
  }, "segment_weighted_sum");
}

/// out[e] = <z[ia[e]], z[ib[e]]>, an E x 1 column.
inline Var pair_dot(Tape& t, Var z, Index ia, Index ib) {
  if (ia.size() != ib.size()) throw NumericError("pair_dot: index lists differ in length");
  const Tensor2& zv = t.value(z);
  Tensor2 out(ia.size(), 1);
  for (std::size_t e = 0; e < ia.size(); ++e) {
    if (ia[e] >= zv.rows() || ib[e] >= zv.rows()) throw NumericError("pair_dot: index out of range");
    out[e] = dot(zv.row(ia[e]), zv.row(ib[e]));
  }
  return t.record(std::move(out), {z}, [z, ia = std::move(ia), ib = std::move(ib)](Tape& tp, std::size_t self) {
    const Tensor2& g = tp.out_grad(self);
    const Tensor2& zz = tp.value(z);
    Tensor2* gz = tp.accumulator(z);
    for (std::size_t e = 0; e < ia.size(); ++e) {
      auto ra = zz.row(ia[e]);
      auto rb = zz.row(ib[e]);
      auto ga = gz->row(ia[e]);
      auto gb = gz->row(ib[e]);
      for (std::size_t c = 0; c < ra.size(); ++c) {
        ga[c] += g[e] * rb[c];
        gb[c] += g[e] * ra[c];
      }
    }
  }, "pair_dot");
}

}  // namespace sigat::ad

#endif  // SIGAT_AUTOGRAD_HPP
