#ifndef SIGAT_ADAM_HPP
#define SIGAT_ADAM_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sigat/tensor.hpp"

namespace sigat {

struct AdamOptions {
  double lr = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0001;  // coupled L2: added to the gradient
};

struct AdamState {
  AdamOptions options;
  std::vector<Tensor2> m;  // first moments, one per parameter
  std::vector<Tensor2> v;  // second moments
  std::uint64_t step_count = 0;

  AdamState() = default;
  explicit AdamState(AdamOptions opt) : options(opt) {}
};

/// One bias-corrected Adam update. Moments are created lazily on the first
/// step to match the parameter shapes.
inline void adam_step(AdamState& state, std::span<Tensor2* const> params, std::span<const Tensor2> grads) {
  if (params.size() != grads.size()) throw NumericError("adam_step: parameter/gradient count mismatch");
  if (state.m.empty()) {
    for (const Tensor2* p : params) {
      state.m.emplace_back(p->rows(), p->cols());
      state.v.emplace_back(p->rows(), p->cols());
    }
  }
  if (state.m.size() != params.size()) throw NumericError("adam_step: parameter count changed");
  for (std::size_t k = 0; k < params.size(); ++k) {
    require_same_shape(*params[k], grads[k], "adam_step");
    require_same_shape(*params[k], state.m[k], "adam_step");
  }

  ++state.step_count;
  const AdamOptions& o = state.options;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(o.beta1, t);
  const double bc2 = 1.0 - std::pow(o.beta2, t);
  const double step_size = o.lr / bc1;
  const double sqrt_bc2 = std::sqrt(bc2);

  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor2& p = *params[k];
    const Tensor2& g = grads[k];
    Tensor2& m = state.m[k];
    Tensor2& v = state.v[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i] + o.weight_decay * p[i];
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * gi;
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * gi * gi;
      p[i] -= step_size * m[i] / (std::sqrt(v[i]) / sqrt_bc2 + o.eps);
    }
    require_finite(p, "adam_step");
  }
}

}  // namespace sigat

#endif  // SIGAT_ADAM_HPP
