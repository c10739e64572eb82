#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "sigat/adam.hpp"
#include "sigat/autograd.hpp"
#include "sigat/grad_check.hpp"

using namespace sigat;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Shape {
  std::size_t rows, cols;
};

using Builder = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

// Flattens the inputs into theta, reduces the op output to a scalar with a
// fixed random weighting, and compares tape gradients with central differences.
double op_grad_error(const std::vector<Shape>& shapes, const Builder& build, std::uint64_t seed,
                     double lo = -1.5, double hi = 1.5) {
  Rng rng(seed);
  std::vector<double> theta;
  for (const auto& s : shapes)
    for (std::size_t i = 0; i < s.rows * s.cols; ++i) theta.push_back(rng.uniform(lo, hi));

  std::optional<Tensor2> weights;
  auto run = [&](std::span<const double> th, std::vector<double>* grad) {
    ad::Tape tape;
    std::vector<ad::Var> in;
    std::size_t off = 0;
    for (const auto& s : shapes) {
      std::vector<double> data(th.begin() + static_cast<std::ptrdiff_t>(off),
                               th.begin() + static_cast<std::ptrdiff_t>(off + s.rows * s.cols));
      off += s.rows * s.cols;
      in.push_back(tape.parameter(Tensor2(s.rows, s.cols, std::move(data))));
    }
    const ad::Var out = build(tape, in);
    if (!weights) {
      Rng wr(seed ^ 0xabcdef);
      Tensor2 w(tape.value(out).rows(), tape.value(out).cols());
      for (auto& x : w.flat()) x = wr.uniform(-1.0, 1.0);
      weights = w;
    }
    const ad::Var loss = ad::sum(tape, ad::mul_const(tape, out, *weights));
    if (grad) {
      tape.backward(loss);
      for (const auto& v : in) {
        const Tensor2 g = tape.grad(v);
        grad->insert(grad->end(), g.flat().begin(), g.flat().end());
      }
    }
    return tape.value(loss).item();
  };
  return grad_check([&](std::span<const double> th) { return run(th, nullptr); },
                    [&](std::span<const double> th) {
                      std::vector<double> g;
                      run(th, &g);
                      return g;
                    },
                    theta, 1e-5);
}

}  // namespace

TEST_CASE("leaky_relu values and gradient convention", "[numeric]") {
  CHECK(leaky_relu(-1.0, 0.2) == -0.2);
  CHECK(leaky_relu(3.5, 0.2) == 3.5);
  CHECK(leaky_relu(0.0, 0.2) == 0.0);
  CHECK(leaky_relu_grad(0.0, 0.2) == 1.0);
  CHECK(leaky_relu_grad(-2.0, 0.2) == 0.2);
  CHECK(leaky_relu_grad(2.0, 0.2) == 1.0);
}

TEST_CASE("softmax examples", "[numeric][softmax]") {
  CHECK(softmax(std::vector<double>{5.0}) == std::vector<double>{1.0});
  for (double c : {-700.0, -3.0, 0.0, 42.0, 700.0}) {
    const auto p = softmax(std::vector<double>{c, c});
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 0.5);
  }
  const auto p = softmax(std::vector<double>{std::log(1.0), std::log(2.0), std::log(3.0)});
  CHECK_THAT(p[0], WithinAbs(1.0 / 6.0, 1e-15));
  CHECK_THAT(p[1], WithinAbs(2.0 / 6.0, 1e-15));
  CHECK_THAT(p[2], WithinAbs(3.0 / 6.0, 1e-15));
  CHECK_THROWS_AS(softmax(std::vector<double>{}), NumericError);
  CHECK_THROWS_AS(softmax(std::vector<double>{1.0, NAN}), NumericError);
}

TEST_CASE("softmax is shift invariant and stays finite at extremes", "[numeric][softmax][property]") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<double> x(n), y(n);
    const double shift = rng.uniform(-300.0, 300.0);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform(-20.0, 20.0);
      y[i] = x[i] + shift;
    }
    const auto a = softmax(x), b = softmax(y);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(a[i] - b[i]) <= 1e-12);
      CHECK(a[i] > 0.0);
      total += a[i];
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
  const auto hi = softmax(std::vector<double>{700.0, -700.0, 699.0});
  CHECK(std::isfinite(hi[0]));
  CHECK(hi[1] >= 0.0);
  CHECK_THAT(hi[0] + hi[1] + hi[2], WithinAbs(1.0, 1e-12));
}

TEST_CASE("stable sigmoid and log-sigmoid at extremes", "[numeric]") {
  CHECK(sigmoid(700.0) == 1.0);
  CHECK(sigmoid(-700.0) >= 0.0);
  CHECK(std::isfinite(log_sigmoid(-700.0)));
  CHECK_THAT(log_sigmoid(-700.0), WithinRel(-700.0, 1e-12));
  CHECK_THAT(log_sigmoid(700.0), WithinAbs(0.0, 1e-300));
  CHECK_THAT(log_sigmoid(0.0), WithinAbs(-std::log(2.0), 1e-15));
}

TEST_CASE("grad_check examples", "[numeric][gradcheck]") {
  auto half_sq = [](std::span<const double> t) {
    double s = 0.0;
    for (double x : t) s += 0.5 * x * x;
    return s;
  };
  auto identity = [](std::span<const double> t) { return std::vector<double>(t.begin(), t.end()); };
  CHECK(grad_check(half_sq, identity, {0.3, -1.7, 4.0, 12.5}) <= 1e-8);

  for (double t0 : {-2.0, -0.1, 0.0, 0.7, 3.0}) {
    const double err = grad_check([](std::span<const double> t) { return std::tanh(t[0]); },
                                  [](std::span<const double> t) {
                                    const double th = std::tanh(t[0]);
                                    return std::vector<double>{1.0 - th * th};
                                  },
                                  {t0});
    CHECK(err < 1e-8);
  }

  CHECK_THROWS_AS(grad_check(half_sq, identity, {1.0}, 1e-2), std::invalid_argument);
  CHECK_THROWS_AS(grad_check(half_sq, identity, {1.0}, 1e-9), std::invalid_argument);
  CHECK_THROWS_AS(grad_check([](std::span<const double> t) { return std::log(t[0]); },
                             [](std::span<const double>) { return std::vector<double>{1.0}; }, {0.0}),
                  NumericError);
}

TEST_CASE("every tape op passes a finite-difference check", "[numeric][gradcheck][property]") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    INFO("seed " << seed);
    CHECK(op_grad_error({{3, 4}, {4, 2}}, [](ad::Tape& t, auto& in) { return ad::matmul(t, in[0], in[1]); }, seed) < 1e-4);
    CHECK(op_grad_error({{3, 2}, {3, 2}}, [](ad::Tape& t, auto& in) { return ad::add(t, in[0], in[1]); }, seed) < 1e-4);
    CHECK(op_grad_error({{3, 2}, {1, 2}}, [](ad::Tape& t, auto& in) { return ad::add_row(t, in[0], in[1]); }, seed) < 1e-4);
    CHECK(op_grad_error({{2, 2}, {2, 3}, {2, 1}},
                        [](ad::Tape& t, auto& in) { return ad::concat_cols(t, {in[0], in[1], in[2]}); }, seed) < 1e-4);
    CHECK(op_grad_error({{5, 2}}, [](ad::Tape& t, auto& in) { return ad::slice_rows(t, in[0], 1, 4); }, seed) < 1e-4);
    // keep leaky_relu inputs away from the kink
    CHECK(op_grad_error({{4, 3}}, [](ad::Tape& t, auto& in) {
            return ad::leaky_relu(t, ad::add(t, in[0], t.constant(Tensor2(4, 3, 0.0))), 0.2);
          }, seed, 0.05, 1.0) < 1e-4);
    CHECK(op_grad_error({{4, 3}}, [](ad::Tape& t, auto& in) { return ad::leaky_relu(t, in[0], 0.2); }, seed, -1.0, -0.05) < 1e-4);
    CHECK(op_grad_error({{4, 3}}, [](ad::Tape& t, auto& in) { return ad::tanh(t, in[0]); }, seed) < 1e-4);
    CHECK(op_grad_error({{4, 3}}, [](ad::Tape& t, auto& in) { return ad::sigmoid(t, in[0]); }, seed) < 1e-4);
    CHECK(op_grad_error({{4, 3}}, [](ad::Tape& t, auto& in) { return ad::log(t, in[0]); }, seed, 0.2, 3.0) < 1e-4);
    CHECK(op_grad_error({{4, 3}}, [](ad::Tape& t, auto& in) { return ad::log_sigmoid(t, in[0]); }, seed, -6.0, 6.0) < 1e-4);
    CHECK(op_grad_error({{4, 3}}, [](ad::Tape& t, auto& in) { return ad::scale(t, in[0], -2.5); }, seed) < 1e-4);
    CHECK(op_grad_error({{4, 3}}, [](ad::Tape& t, auto& in) { return ad::sum(t, in[0]); }, seed) < 1e-4);
    CHECK(op_grad_error({{4, 3}}, [](ad::Tape& t, auto& in) { return ad::gather_rows(t, in[0], {3, 0, 3, 1}); }, seed) < 1e-4);
    CHECK(op_grad_error({{7, 1}}, [](ad::Tape& t, auto& in) {
            auto offsets = std::make_shared<const ad::Index>(ad::Index{0, 3, 3, 4, 7});
            return ad::segment_softmax(t, in[0], offsets);
          }, seed, -3.0, 3.0) < 1e-4);
    CHECK(op_grad_error({{4, 3}, {6, 1}}, [](ad::Tape& t, auto& in) {
            auto idx = std::make_shared<const ad::Index>(ad::Index{0, 2, 2, 3, 1, 0});
            auto offsets = std::make_shared<const ad::Index>(ad::Index{0, 2, 2, 6});
            return ad::segment_weighted_sum(t, in[0], in[1], idx, offsets);
          }, seed) < 1e-4);
    CHECK(op_grad_error({{5, 3}}, [](ad::Tape& t, auto& in) { return ad::pair_dot(t, in[0], {0, 1, 4, 2}, {1, 1, 0, 3}); }, seed) < 1e-4);
  }
}

TEST_CASE("composite attention block passes a finite-difference check", "[numeric][gradcheck]") {
  // features -> transform -> per-edge logits -> segment softmax -> weighted sum -> tanh
  const auto err = op_grad_error({{5, 3}, {3, 3}, {6, 1}}, [](ad::Tape& t, auto& in) {
    const ad::Var h = ad::matmul(t, in[0], in[1]);
    const ad::Index src{0, 0, 1, 1, 1, 4}, nbr{1, 2, 0, 3, 4, 2};
    const ad::Var pair = ad::concat_cols(t, {ad::gather_rows(t, h, src), ad::gather_rows(t, h, nbr)});
    const ad::Var logits = ad::leaky_relu(t, ad::matmul(t, pair, in[2]), 0.2);
    auto offsets = std::make_shared<const ad::Index>(ad::Index{0, 2, 5, 5, 5, 6});
    const ad::Var alpha = ad::segment_softmax(t, logits, offsets);
    auto idx = std::make_shared<const ad::Index>(nbr);
    return ad::tanh(t, ad::segment_weighted_sum(t, h, alpha, idx, offsets));
  }, 11);
  CHECK(err < 1e-4);
}

TEST_CASE("tape rejects non-finite results", "[numeric]") {
  ad::Tape t;
  const ad::Var x = t.parameter(Tensor2(1, 2, std::vector<double>{1.0, 0.0}));
  CHECK_THROWS_AS(ad::log(t, x), NumericError);
  const ad::Var big = t.constant(Tensor2(1, 1, 1e308));
  CHECK_THROWS_AS(ad::scale(t, big, 10.0), NumericError);
  // logits at +-700 stay finite through log-sigmoid
  const ad::Var ext = t.parameter(Tensor2(1, 2, std::vector<double>{700.0, -700.0}));
  const ad::Var ls = ad::log_sigmoid(t, ext);
  CHECK(t.value(ls).all_finite());
  t.backward(ad::sum(t, ls));
  CHECK(t.grad(ext).all_finite());
}

TEST_CASE("gradients accumulate when a variable is reused", "[numeric]") {
  ad::Tape t;
  const ad::Var x = t.parameter(Tensor2(1, 1, 3.0));
  const ad::Var y = ad::add(t, x, x);
  const ad::Var z = ad::mul_const(t, y, Tensor2(1, 1, 2.0));
  t.backward(ad::sum(t, z));
  CHECK(t.grad(x).item() == 4.0);
  const ad::Var c = t.constant(Tensor2(1, 1, 1.0));
  CHECK_FALSE(t.requires_grad(c));
}

TEST_CASE("adam step examples", "[numeric][adam]") {
  SECTION("first step with unit gradient moves by lr") {
    AdamState s(AdamOptions{.lr = 0.01, .weight_decay = 0.0});
    Tensor2 p(1, 1, 2.0);
    std::vector<Tensor2*> params{&p};
    std::vector<Tensor2> grads{Tensor2(1, 1, 1.0)};
    adam_step(s, params, grads);
    CHECK_THAT(p.item(), WithinAbs(2.0 - 0.01, 1e-9));
    CHECK(s.step_count == 1);
  }
  SECTION("zero gradient without decay leaves parameters unchanged") {
    AdamState s(AdamOptions{.weight_decay = 0.0});
    Tensor2 p(2, 2, std::vector<double>{1, -2, 3, -4});
    const Tensor2 before = p;
    std::vector<Tensor2*> params{&p};
    std::vector<Tensor2> grads{Tensor2(2, 2)};
    for (int i = 0; i < 5; ++i) adam_step(s, params, grads);
    CHECK(p == before);
  }
  SECTION("decay only shrinks the parameter") {
    AdamState s(AdamOptions{.weight_decay = 0.0001});
    Tensor2 p(1, 1, 1.0);
    std::vector<Tensor2*> params{&p};
    std::vector<Tensor2> grads{Tensor2(1, 1)};
    adam_step(s, params, grads);
    CHECK(p.item() < 1.0);
    // effective gradient 1e-4; first bias-corrected step is about lr
    CHECK_THAT(p.item(), WithinAbs(1.0 - 0.0005, 1e-6));
  }
  SECTION("shape mismatch") {
    AdamState s;
    Tensor2 p(2, 2);
    std::vector<Tensor2*> params{&p};
    std::vector<Tensor2> grads{Tensor2(2, 3)};
    CHECK_THROWS_AS(adam_step(s, params, grads), NumericError);
  }
}

TEST_CASE("adam matches a hand-rolled reference over several steps", "[numeric][adam]") {
  const AdamOptions o{.lr = 0.05, .beta1 = 0.8, .beta2 = 0.95, .eps = 1e-6, .weight_decay = 0.01};
  AdamState s(o);
  Tensor2 p(1, 3, std::vector<double>{0.5, -1.0, 2.0});
  std::vector<double> ref{0.5, -1.0, 2.0}, m(3, 0.0), v(3, 0.0);
  Rng rng(3);
  for (int step = 1; step <= 10; ++step) {
    Tensor2 g(1, 3);
    for (auto& x : g.flat()) x = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < 3; ++i) {
      const double gi = g[i] + o.weight_decay * ref[i];
      m[i] = o.beta1 * m[i] + (1 - o.beta1) * gi;
      v[i] = o.beta2 * v[i] + (1 - o.beta2) * gi * gi;
      const double mh = m[i] / (1 - std::pow(o.beta1, step));
      const double vh = v[i] / (1 - std::pow(o.beta2, step));
      ref[i] -= o.lr * mh / (std::sqrt(vh) + o.eps);
    }
    std::vector<Tensor2*> params{&p};
    std::vector<Tensor2> grads{g};
    adam_step(s, params, grads);
  }
  for (std::size_t i = 0; i < 3; ++i) CHECK_THAT(p[i], WithinAbs(ref[i], 1e-12));
}
