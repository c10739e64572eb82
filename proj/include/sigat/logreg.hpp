#ifndef SIGAT_LOGREG_HPP
#define SIGAT_LOGREG_HPP

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "sigat/tensor.hpp"

namespace sigat {

/// Edge classification examples: one row of features and a 0/1 label each.
struct EdgeDataset {
  Tensor2 features;
  std::vector<int> labels;  // 1 = positive sign

  std::size_t size() const { return labels.size(); }
};

struct LogregOptions {
  double l2_c = 1.0;  // inverse regularization strength; intercept is not penalized
  std::size_t max_iter = 100;
  double tolerance = 1e-6;  // on the Euclidean norm of the objective gradient
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  bool degenerate = false;  // single-class training data; constant prediction
  std::size_t iterations = 0;
  double gradient_norm = 0.0;

  double decision(std::span<const double> x) const {
    double z = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) z += weights[i] * x[i];
    return z;
  }
  double predict_proba(std::span<const double> x) const { return sigmoid(decision(x)); }

  std::vector<double> predict_proba(const Tensor2& x) const {
    std::vector<double> p(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) p[r] = predict_proba(x.row(r));
    return p;
  }
};

namespace detail {

struct LogregObjective {
  const Eigen::MatrixXd& x;  // n x (p+1), last column ones
  const Eigen::VectorXd& y;
  double inv_c;

  double value(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd z = x * theta;
    double f = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) f += -log_sigmoid(z[i]) + (1.0 - y[i]) * z[i];
    const auto w = theta.head(theta.size() - 1);
    return f + 0.5 * inv_c * w.squaredNorm();
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& theta, Eigen::VectorXd* prob) const {
    Eigen::VectorXd p = x * theta;
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = sigmoid(p[i]);
    Eigen::VectorXd g = x.transpose() * (p - y);
    g.head(g.size() - 1) += inv_c * theta.head(theta.size() - 1);
    if (prob) *prob = std::move(p);
    return g;
  }
};

}  // namespace detail

/// Fits min sum log-loss + ||w||^2 / (2 C) with damped Newton steps until
/// the gradient norm drops below the tolerance or max_iter is reached.
/// Single-class data returns a constant classifier at the smoothed log-odds.
inline LogisticModel train_logreg(const EdgeDataset& data, const LogregOptions& opt = {}) {
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("train_logreg: empty dataset");
  if (data.features.rows() != n) throw std::invalid_argument("train_logreg: feature/label count mismatch");
  if (!(opt.l2_c > 0.0)) throw std::invalid_argument("train_logreg: l2_c must be > 0");
  const std::size_t p = data.features.cols();

  std::size_t positives = 0;
  for (int l : data.labels) {
    if (l != 0 && l != 1) throw std::invalid_argument("train_logreg: labels must be 0 or 1");
    positives += static_cast<std::size_t>(l);
  }
  LogisticModel model;
  model.weights.assign(p, 0.0);
  if (positives == 0 || positives == n) {
    model.degenerate = true;
    model.bias = std::log((static_cast<double>(positives) + 0.5) / (static_cast<double>(n - positives) + 0.5));
    return model;
  }

  Eigen::MatrixXd x(n, p + 1);
  Eigen::VectorXd y(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < p; ++c) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = data.features(r, c);
    x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(p)) = 1.0;
    y[static_cast<Eigen::Index>(r)] = data.labels[r];
  }
  const detail::LogregObjective obj{x, y, 1.0 / opt.l2_c};
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p + 1));
  double f = obj.value(theta);
  Eigen::VectorXd prob;
  Eigen::VectorXd g = obj.gradient(theta, &prob);

  std::size_t it = 0;
  for (; it < opt.max_iter && g.norm() >= opt.tolerance; ++it) {
    Eigen::VectorXd dw(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < dw.size(); ++i) dw[i] = prob[i] * (1.0 - prob[i]);
    Eigen::MatrixXd h = x.transpose() * dw.asDiagonal() * x;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(p); ++i) h(i, i) += obj.inv_c;
    h(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)) += 1e-12;
    const Eigen::VectorXd step = h.ldlt().solve(g);

    double t = 1.0;
    const double slope = g.dot(step);
    Eigen::VectorXd next;
    double fn = f;
    for (int ls = 0; ls < 50; ++ls, t *= 0.5) {
      next = theta - t * step;
      fn = obj.value(next);
      if (fn <= f - 1e-4 * t * slope) break;
    }
    if (!(fn <= f)) break;  // no further descent available at machine precision
    theta = std::move(next);
    f = fn;
    g = obj.gradient(theta, &prob);
  }

  for (std::size_t c = 0; c < p; ++c) model.weights[c] = theta[static_cast<Eigen::Index>(c)];
  model.bias = theta[static_cast<Eigen::Index>(p)];
  model.iterations = it;
  model.gradient_norm = g.norm();
  return model;
}

}  // namespace sigat

#endif  // SIGAT_LOGREG_HPP
