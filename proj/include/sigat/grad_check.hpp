#ifndef SIGAT_GRAD_CHECK_HPP
#define SIGAT_GRAD_CHECK_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sigat/common.hpp"

namespace sigat {

/// Compares an analytic gradient with central differences.
///
/// Returns max_i |analytic_i - numeric_i| / max(1, |analytic_i|).
/// `f` evaluates the objective; `grad` returns the analytic gradient at theta.
inline double grad_check(const std::function<double(std::span<const double>)>& f,
                         const std::function<std::vector<double>(std::span<const double>)>& grad,
                         std::vector<double> theta, double h = 1e-5) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw std::invalid_argument("grad_check: h must lie in [1e-7, 1e-3]");
  const std::vector<double> analytic = grad(theta);
  if (analytic.size() != theta.size()) throw NumericError("grad_check: gradient length mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double keep = theta[i];
    theta[i] = keep + h;
    const double fp = f(theta);
    theta[i] = keep - h;
    const double fm = f(theta);
    theta[i] = keep;
    if (!std::isfinite(fp) || !std::isfinite(fm)) throw NumericError("grad_check: objective is not finite");
    const double numeric = (fp - fm) / (2.0 * h);
    worst = std::max(worst, std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i])));
  }
  return worst;
}

}  // namespace sigat

#endif  // SIGAT_GRAD_CHECK_HPP
