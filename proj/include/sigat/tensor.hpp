#ifndef SIGAT_TENSOR_HPP
#define SIGAT_TENSOR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sigat/common.hpp"

namespace sigat {

/// Dense row-major matrix of doubles. Vectors are 1 x n or n x 1.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw NumericError("Tensor2: data length does not match shape");
  }

  static Tensor2 scalar(double v) { return Tensor2(1, 1, v); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(const Tensor2& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const double& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  const double& operator[](std::size_t i) const { return data_[i]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }
  double item() const {
    if (data_.size() != 1) throw NumericError("Tensor2::item on non-scalar");
    return data_[0];
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
  }

  std::string shape_string() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

  friend bool operator==(const Tensor2&, const Tensor2&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline void require_finite(const Tensor2& t, const char* where) {
  if (!t.all_finite()) throw NumericError(std::string("non-finite value produced by ") + where);
}

inline void require_same_shape(const Tensor2& a, const Tensor2& b, const char* where) {
  if (!a.same_shape(b))
    throw NumericError(std::string(where) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
}

// ---------------------------------------------------------------------------
// Kernels

/// C = A * B
inline Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
  if (a.cols() != b.rows()) throw NumericError("matmul: " + a.shape_string() + " * " + b.shape_string());
  Tensor2 c(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* bk = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

/// C += A^T * B
inline void matmul_tn_acc(const Tensor2& a, const Tensor2& b, Tensor2& c) {
  if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols())
    throw NumericError("matmul_tn: shape mismatch");
  const std::size_t n = b.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* br = b.row(r).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double ari = a(r, i);
      if (ari == 0.0) continue;
      double* ci = c.row(i).data();
      for (std::size_t j = 0; j < n; ++j) ci[j] += ari * br[j];
    }
  }
}

/// C += A * B^T
inline void matmul_nt_acc(const Tensor2& a, const Tensor2& b, Tensor2& c) {
  if (a.cols() != b.cols() || c.rows() != a.rows() || c.cols() != b.rows())
    throw NumericError("matmul_nt: shape mismatch");
  const std::size_t k = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* bj = b.row(j).data();
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += ai[t] * bj[t];
      c(i, j) += s;
    }
  }
}

inline void add_inplace(Tensor2& dst, const Tensor2& src) {
  require_same_shape(dst, src, "add_inplace");
  auto d = dst.flat();
  auto s = src.flat();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// ---------------------------------------------------------------------------
// Scalar functions

/// x for x >= 0, slope * x otherwise.
inline double leaky_relu(double x, double slope) { return x >= 0.0 ? x : slope * x; }

/// Derivative convention: 1 at x = 0.
inline double leaky_relu_grad(double x, double slope) { return x >= 0.0 ? 1.0 : slope; }

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(sigmoid(x)) without overflow for large |x|.
inline double log_sigmoid(double x) { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

/// Softmax with max subtraction. Throws on empty or non-finite input.
inline std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw NumericError("softmax of empty list");
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : logits) {
    if (!std::isfinite(x)) throw NumericError("softmax: non-finite logit");
    mx = std::max(mx, x);
  }
  std::vector<double> out(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += (out[i] = std::exp(logits[i] - mx));
  for (double& p : out) p /= z;
  return out;
}

/// Debug dump: one row per line, tab separated.
inline void write_tsv(std::ostream& os, const Tensor2& t) {
  os.precision(17);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.cols(); ++c) os << (c ? "\t" : "") << t(r, c);
    os << '\n';
  }
}

}  // namespace sigat

#endif  // SIGAT_TENSOR_HPP
