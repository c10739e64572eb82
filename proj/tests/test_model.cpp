#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "oracles/model_oracle.hpp"
#include "sigat/grad_check.hpp"
#include "sigat/model.hpp"
#include "test_support.hpp"

using namespace sigat;
using Catch::Matchers::WithinAbs;

namespace {

SigatConfig toy_config(std::size_t d, MotifSubset subset = MotifSubset::All38, std::uint64_t seed = 3) {
  SigatConfig c;
  c.dim = d;
  c.motif_subset = subset;
  c.seed = seed;
  return c;
}

// Spread X off the [0,1) default so attention logits land on both sides of zero.
void jitter(SigatModel& m, std::uint64_t seed) {
  Rng r(seed);
  for (auto& x : m.features.flat()) x = r.uniform(-1.0, 1.0);
  for (auto& b : m.b1.flat()) b = r.uniform(-0.3, 0.3);
  for (auto& b : m.b2.flat()) b = r.uniform(-0.3, 0.3);
}

std::size_t index_of_motif(const SigatModel& m, int id) {
  return static_cast<std::size_t>(std::ranges::find(m.motifs, id) - m.motifs.begin());
}

}  // namespace

TEST_CASE("init_model shapes and determinism", "[model][init]") {
  const auto g = testing_support::random_digraph(12, 30, 1);
  const auto cfg = toy_config(5);
  const auto a = init_model(g, cfg);
  const auto b = init_model(g, cfg);
  CHECK(a == b);
  CHECK(a.features.rows() == 12);
  CHECK(a.features.cols() == 5);
  CHECK(a.transforms.size() == 38);
  CHECK(a.w1.rows() == 39 * 5);
  CHECK(a.w1.cols() == 5);
  CHECK(a.attention[0].rows() == 10);
  for (double x : a.features.flat()) {
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  for (double x : a.b1.flat()) CHECK(x == 0.0);

  const auto pm = init_model(g, toy_config(5, MotifSubset::PlusMinus2));
  CHECK(pm.transforms.size() == 2);
  CHECK(pm.w1.rows() == 15);
  CHECK(pm.motifs == std::vector<int>{0, 1});

  auto other = cfg;
  other.seed = 4;
  CHECK_FALSE(init_model(g, other) == a);
}

TEST_CASE("aggregation examples", "[model][attention]") {
  // star: 0 -> 1 +, 0 -> 2 +
  const SignedDigraph g(3, {{0, 1, 1}, {0, 2, 1}});
  const auto nb = extract(g);
  auto m = init_model(g, toy_config(3));
  jitter(m, 9);
  const std::size_t k_out = index_of_motif(m, 2);

  SECTION("single neighbor gives W X(v)") {
    const std::size_t k_in = index_of_motif(m, 4);
    const auto got = aggregate_motif(m, k_in, 1, nb);
    const auto want = oracle::row_times(oracle::feature(m, 0), m.transforms[k_in]);
    for (std::size_t c = 0; c < 3; ++c) CHECK(got[c] == want[c]);
  }
  SECTION("identical neighbor embeddings split attention evenly") {
    for (std::size_t c = 0; c < 3; ++c) m.features(2, c) = m.features(1, c);
    const auto alpha = attention_weights(m, k_out, 0, nb);
    REQUIRE(alpha.size() == 2);
    CHECK(alpha[0] == 0.5);
    CHECK(alpha[1] == 0.5);
    const auto got = aggregate_motif(m, k_out, 0, nb);
    const auto want = oracle::row_times(oracle::feature(m, 1), m.transforms[k_out]);
    for (std::size_t c = 0; c < 3; ++c) CHECK_THAT(got[c], WithinAbs(want[c], 1e-15));
  }
  SECTION("empty neighborhood gives zeros") {
    const auto got = aggregate_motif(m, k_out, 2, nb);
    for (double x : got) CHECK(x == 0.0);
    CHECK(attention_weights(m, k_out, 2, nb).empty());
  }
}

TEST_CASE("aggregation matches the scalar oracle", "[model][attention][oracle]") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto g = testing_support::random_digraph(4 + seed % 5, 14, seed);
    const auto nb = extract(g);
    auto m = init_model(g, toy_config(3, MotifSubset::All38, seed));
    jitter(m, seed);
    for (std::size_t k = 0; k < m.motifs.size(); ++k)
      for (NodeId u = 0; u < g.num_nodes(); ++u) {
        auto span = nb.neighbors(m.motifs[k], u);
        const auto want = oracle::aggregate(m, k, u, {span.begin(), span.end()});
        const auto got = aggregate_motif(m, k, u, nb);
        for (std::size_t c = 0; c < 3; ++c) CHECK_THAT(got[c], WithinAbs(want[c], 1e-12));
        const auto alpha = attention_weights(m, k, u, nb);
        if (!alpha.empty()) {
          double total = 0.0;
          for (double a : alpha) {
            CHECK(a > 0.0);
            CHECK(a <= 1.0);
            total += a;
          }
          CHECK_THAT(total, WithinAbs(1.0, 1e-9));
        }
      }
  }
}

TEST_CASE("forward examples", "[model][forward]") {
  const auto g = testing_support::random_digraph(10, 30, 2);
  const auto nb = extract(g);

  SECTION("constant path through b2") {
    auto m = init_model(g, toy_config(4));
    for (Tensor2* p : m.parameters()) p->fill(0.0);
    for (std::size_t c = 0; c < 4; ++c) m.b2(0, c) = 0.25 * static_cast<double>(c + 1);
    for (NodeId u = 0; u < 10; ++u) {
      const auto z = forward(m, u, nb);
      for (std::size_t c = 0; c < 4; ++c) CHECK(z[c] == m.b2(0, c));
    }
  }
  SECTION("isolated node uses only its own features") {
    std::vector<Edge> edges = g.edges();
    const SignedDigraph g2(11, edges);  // node 10 has no edges
    const auto nb2 = extract(g2);
    auto m = init_model(g2, toy_config(4));
    jitter(m, 4);
    oracle::Vec cat = oracle::feature(m, 10);
    cat.resize(39 * 4, 0.0);
    oracle::Vec h = oracle::row_times(cat, m.w1);
    for (std::size_t j = 0; j < h.size(); ++j) h[j] = std::tanh(h[j] + m.b1(0, j));
    oracle::Vec want = oracle::row_times(h, m.w2);
    const auto got = forward(m, 10, nb2);
    for (std::size_t c = 0; c < 4; ++c) CHECK_THAT(got[c], WithinAbs(want[c] + m.b2(0, c), 1e-12));
  }
  SECTION("matches the oracle and embed_all") {
    auto m = init_model(g, toy_config(4));
    jitter(m, 5);
    const Tensor2 z = embed_all(m, nb, 3);
    CHECK(z.rows() == 10);
    CHECK(z.cols() == 4);
    for (NodeId u = 0; u < 10; ++u) {
      const auto want = oracle::forward(m, u, nb);
      const auto got = forward(m, u, nb);
      for (std::size_t c = 0; c < 4; ++c) {
        CHECK_THAT(got[c], WithinAbs(want[c], 1e-12));
        CHECK(z(u, c) == got[c]);
      }
    }
  }
}

TEST_CASE("neighbor order does not change the forward output", "[model][property]") {
  const auto g = testing_support::random_digraph(12, 50, 6);
  const auto nb = extract(g);
  auto m = init_model(g, toy_config(3));
  jitter(m, 6);
  // reverse every neighbor list
  std::array<Csr, kNumMotifs> per;
  for (int id = 0; id < kNumMotifs; ++id) {
    per[static_cast<std::size_t>(id)] = nb.graph(id);
    auto& c = per[static_cast<std::size_t>(id)];
    for (NodeId u = 0; u < 12; ++u) std::reverse(c.targets.begin() + static_cast<std::ptrdiff_t>(c.offsets[u]),
                                                 c.targets.begin() + static_cast<std::ptrdiff_t>(c.offsets[u + 1]));
  }
  const MotifNeighborhoods reversed(12, per, nb.present());
  for (NodeId u = 0; u < 12; ++u) {
    const auto a = forward(m, u, nb), b = forward(m, u, reversed);
    for (std::size_t c = 0; c < 3; ++c) CHECK_THAT(a[c], WithinAbs(b[c], 1e-12));
  }
}

TEST_CASE("plusminus2 ignores triangle neighborhoods", "[model][property]") {
  const auto g = testing_support::random_digraph(12, 50, 7);
  const auto nb = extract(g);
  auto m = init_model(g, toy_config(3, MotifSubset::PlusMinus2));
  jitter(m, 7);
  std::array<Csr, kNumMotifs> per;
  for (int id = 0; id < kNumMotifs; ++id) per[static_cast<std::size_t>(id)] = nb.graph(id);
  // wipe all triangle and directed motifs
  for (int id = 2; id < kNumMotifs; ++id) {
    auto& c = per[static_cast<std::size_t>(id)];
    c.targets.clear();
    std::ranges::fill(c.offsets, 0);
  }
  const MotifNeighborhoods stripped(12, per, nb.present());
  for (NodeId u = 0; u < 12; ++u) CHECK(forward(m, u, nb) == forward(m, u, stripped));
}

TEST_CASE("loss examples", "[model][loss]") {
  // node 0: positive neighbors 1, 2; negative neighbor 3
  const SignedDigraph g(4, {{0, 1, 1}, {2, 0, 1}, {0, 3, -1}});
  const auto nb = extract(g);
  auto m = init_model(g, toy_config(3));
  for (Tensor2* p : m.parameters()) p->fill(0.0);
  const NodeId batch[] = {0};
  CHECK_THAT(batch_loss(m, batch, g, nb, 1.0), WithinAbs(3.0 * std::log(2.0), 1e-12));
  CHECK_THAT(batch_loss(m, batch, g, nb, 4.0), WithinAbs(6.0 * std::log(2.0), 1e-12));

  const SignedDigraph g5(5, g.edges());
  const auto nb5 = extract(g5);
  auto m5 = init_model(g5, toy_config(3));
  jitter(m5, 1);
  const NodeId lonely[] = {4};
  CHECK(batch_loss(m5, lonely, g5, nb5, 1.0) == 0.0);
}

TEST_CASE("loss matches the scalar oracle", "[model][loss][oracle]") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto g = testing_support::random_digraph(10, 28, seed, 0.6);
    const auto nb = extract(g);
    auto m = init_model(g, toy_config(3, MotifSubset::All38, seed));
    jitter(m, seed + 50);
    const auto ln = loss_neighbors(g, NeighborMode::Union);
    const std::vector<NodeId> batch{0, 3, 5, 9};
    const double want = oracle::loss(m, batch, ln, nb, 2.5);
    CHECK_THAT(batch_loss(m, batch, g, nb, 2.5), WithinAbs(want, 1e-10));
  }
}

TEST_CASE("loss decomposes over batch nodes", "[model][loss][property]") {
  const auto g = testing_support::random_digraph(14, 40, 8);
  const auto nb = extract(g);
  auto m = init_model(g, toy_config(4));
  jitter(m, 8);
  std::vector<NodeId> all(14);
  for (NodeId i = 0; i < 14; ++i) all[i] = i;
  double parts = 0.0;
  for (NodeId u : all) {
    const NodeId one[] = {u};
    parts += batch_loss(m, one, g, nb, 1.7);
  }
  CHECK_THAT(batch_loss(m, all, g, nb, 1.7), WithinAbs(parts, 1e-10));
}

TEST_CASE("loss gradients pass finite differences per parameter group", "[model][gradcheck]") {
  for (std::size_t d : {2u, 4u}) {
    const auto g = testing_support::random_digraph(10, 26, 11 + d, 0.6);
    const auto nb = extract(g);
    auto base = init_model(g, toy_config(d, MotifSubset::All38, d));
    jitter(base, 12);
    const auto ln = loss_neighbors(g, NeighborMode::Union);
    const std::vector<NodeId> batch{1, 2, 6, 7};
    const auto lg = batch_loss_and_grad(base, batch, ln, nb, 1.5);
    const auto groups = base.parameters();
    REQUIRE(lg.grads.size() == groups.size());
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      INFO("d " << d << " group " << gi);
      auto f = [&](std::span<const double> th) {
        SigatModel m = base;
        std::ranges::copy(th, m.parameters()[gi]->flat().begin());
        return batch_loss(m, batch, g, nb, 1.5);
      };
      auto grad = [&](std::span<const double>) {
        auto flat = lg.grads[gi].flat();
        return std::vector<double>(flat.begin(), flat.end());
      };
      auto theta = groups[gi]->flat();
      CHECK(grad_check(f, grad, {theta.begin(), theta.end()}) < 1e-4);
    }
  }
}

TEST_CASE("auto loss balance", "[model][loss]") {
  const SignedDigraph g(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 0, -1}});
  const auto ln = loss_neighbors(g, NeighborMode::Union);
  CHECK(ln.pos.size() == 6);
  CHECK(ln.neg.size() == 2);
  CHECK(auto_loss_balance(ln) == 3.0);
  const auto out = loss_neighbors(g, NeighborMode::OutOnly);
  CHECK(out.pos.size() == 3);
  const SignedDigraph all_pos(3, {{0, 1, 1}});
  CHECK(auto_loss_balance(loss_neighbors(all_pos, NeighborMode::Union)) == 1.0);
}

TEST_CASE("training reduces the loss and is deterministic", "[model][train]") {
  const SignedDigraph tri(3, {{0, 1, 1}, {1, 2, 1}, {2, 0, 1}});
  const auto nb = extract(tri);
  auto cfg = toy_config(4);
  cfg.epochs = 200;
  cfg.batch_size = 2;
  cfg.lr = 0.01;
  std::vector<std::size_t> epochs_seen;
  const auto r = train(tri, nb, cfg, [&](std::size_t e, double, const SigatModel&) { epochs_seen.push_back(e); });
  REQUIRE(r.loss_trace.size() == 200);
  CHECK(r.loss_trace.back() < r.loss_trace.front());
  CHECK(epochs_seen.front() == 1);
  CHECK(epochs_seen.back() == 200);

  const auto again = train(tri, nb, cfg);
  CHECK(again.loss_trace == r.loss_trace);
  CHECK(again.model == r.model);
}

TEST_CASE("training with frozen features and neighbor cap", "[model][train]") {
  const auto g = testing_support::random_digraph(30, 120, 13);
  const auto nb = extract(g);
  auto cfg = toy_config(4);
  cfg.epochs = 3;
  cfg.batch_size = 7;
  cfg.freeze_features = true;
  cfg.neighbor_cap = 2;
  const auto r = train(g, nb, cfg);
  CHECK(r.model.features == init_model(g, cfg).features);
  CHECK(r.loss_trace.size() == 3);
  CHECK(train(g, nb, cfg).model == r.model);

  const auto pm_nb = extract(g, plus_minus_motifs());
  CHECK_THROWS_AS(train(g, pm_nb, toy_config(4)), std::invalid_argument);
}

TEST_CASE("checkpoint round trip", "[model][io]") {
  const auto g = testing_support::random_digraph(9, 20, 14);
  auto m = init_model(g, toy_config(3, MotifSubset::PlusMinus2));
  jitter(m, 14);
  std::stringstream ss;
  write_checkpoint(ss, m);
  const std::string bytes = ss.str();
  std::istringstream in(bytes);
  CHECK(read_checkpoint(in) == m);
  std::istringstream cut(bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_AS(read_checkpoint(cut), DataError);

  std::ostringstream tsv;
  const Tensor2 z = embed_all(m, extract(g, plus_minus_motifs()));
  write_embeddings_tsv(tsv, z);
  std::istringstream lines(tsv.str());
  std::string first;
  std::getline(lines, first);
  CHECK(first.rfind("0\t", 0) == 0);
  CHECK(std::ranges::count(first, '\t') == 3);
}
