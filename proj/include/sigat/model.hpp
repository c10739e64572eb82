#ifndef SIGAT_MODEL_HPP
#define SIGAT_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigat/adam.hpp"
#include "sigat/autograd.hpp"
#include "sigat/binary_io.hpp"
#include "sigat/graph.hpp"
#include "sigat/motif.hpp"
#include "sigat/tensor.hpp"

namespace sigat {

inline constexpr double kAttentionSlope = 0.2;

enum class MotifSubset { All38, PlusMinus2 };

/// Which incident edges make v a positive/negative neighbor of u in the loss.
enum class NeighborMode { Union, OutOnly, InOnly };

inline const char* to_string(MotifSubset s) { return s == MotifSubset::All38 ? "all38" : "plusminus2"; }
inline const char* to_string(NeighborMode m) {
  return m == NeighborMode::Union ? "union" : m == NeighborMode::OutOnly ? "out" : "in";
}
inline std::optional<MotifSubset> parse_motif_subset(std::string_view s) {
  if (s == "all38") return MotifSubset::All38;
  if (s == "plusminus2") return MotifSubset::PlusMinus2;
  return std::nullopt;
}
inline std::optional<NeighborMode> parse_neighbor_mode(std::string_view s) {
  if (s == "union") return NeighborMode::Union;
  if (s == "out") return NeighborMode::OutOnly;
  if (s == "in") return NeighborMode::InOnly;
  return std::nullopt;
}

struct SigatConfig {
  std::size_t dim = 20;
  std::size_t hidden = 0;  // 0: same as dim
  std::size_t epochs = 100;
  std::size_t batch_size = 500;
  double lr = 0.0005;
  double weight_decay = 0.0001;
  std::optional<double> loss_balance;  // Q; empty means "auto"
  MotifSubset motif_subset = MotifSubset::All38;
  std::optional<std::size_t> neighbor_cap;
  std::uint64_t seed = 0;
  NeighborMode loss_neighbors = NeighborMode::Union;
  bool shuffle_batches = true;
  bool freeze_features = false;

  std::size_t hidden_width() const { return hidden ? hidden : dim; }

  std::vector<int> motif_ids() const {
    return motif_subset == MotifSubset::All38 ? all_motifs() : plus_minus_motifs();
  }

  void validate() const {
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (loss_balance && !(*loss_balance > 0.0)) throw std::invalid_argument("loss balance Q must be > 0");
    if (neighbor_cap && *neighbor_cap < 1) throw std::invalid_argument("neighbor_cap must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("lr must be > 0");
    if (weight_decay < 0.0) throw std::invalid_argument("weight_decay must be >= 0");
  }
};

inline void to_json(nlohmann::json& j, const SigatConfig& c) {
  j = {{"dim", c.dim},
       {"hidden", c.hidden_width()},
       {"epochs", c.epochs},
       {"batch_size", c.batch_size},
       {"lr", c.lr},
       {"weight_decay", c.weight_decay},
       {"loss_balance", c.loss_balance ? nlohmann::json(*c.loss_balance) : nlohmann::json("auto")},
       {"motif_subset", to_string(c.motif_subset)},
       {"neighbor_cap", c.neighbor_cap ? nlohmann::json(*c.neighbor_cap) : nlohmann::json(nullptr)},
       {"seed", c.seed},
       {"loss_neighbors", to_string(c.loss_neighbors)},
       {"shuffle_batches", c.shuffle_batches},
       {"freeze_features", c.freeze_features}};
}

/// Trainable state. Parameter order everywhere: X, W_m..., a_m..., W1, b1, W2, b2.
struct SigatModel {
  std::vector<int> motifs;          // catalog ids, ascending
  Tensor2 features;                 // X: num_nodes x d
  std::vector<Tensor2> transforms;  // W_m: d x d, applied as X(v) * W_m
  std::vector<Tensor2> attention;   // a_m: 2d x 1, [source half; neighbor half]
  Tensor2 w1;                       // (|M|+1)d x h
  Tensor2 b1;                       // 1 x h
  Tensor2 w2;                       // h x d
  Tensor2 b2;                       // 1 x d

  std::size_t num_nodes() const { return features.rows(); }
  std::size_t dim() const { return features.cols(); }
  std::size_t hidden() const { return w1.cols(); }

  std::vector<Tensor2*> parameters() {
    std::vector<Tensor2*> p{&features};
    for (auto& w : transforms) p.push_back(&w);
    for (auto& a : attention) p.push_back(&a);
    for (Tensor2* t : {&w1, &b1, &w2, &b2}) p.push_back(t);
    return p;
  }
  std::vector<const Tensor2*> parameters() const {
    std::vector<const Tensor2*> p;
    for (Tensor2* t : const_cast<SigatModel*>(this)->parameters()) p.push_back(t);
    return p;
  }

  friend bool operator==(const SigatModel&, const SigatModel&) = default;
};

namespace detail {

inline Tensor2 uniform_tensor(std::size_t rows, std::size_t cols, double lo, double hi, std::uint64_t seed) {
  Rng rng(seed);
  Tensor2 t(rows, cols);
  for (double& x : t.flat()) x = rng.uniform(lo, hi);
  return t;
}

inline Tensor2 scaled_uniform(std::size_t fan_in, std::size_t fan_out, std::size_t rows, std::size_t cols,
                              std::uint64_t seed) {
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return uniform_tensor(rows, cols, -r, r, seed);
}

}  // namespace detail

/// X ~ U[0,1); W_m, W1, W2 ~ U(+-sqrt(6/(fan_in+fan_out))); a_m ~ U(+-sqrt(6/(2d+1)));
/// biases zero. Each group draws from its own stream of `cfg.seed`.
inline SigatModel init_model(std::size_t num_nodes, const SigatConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.dim, h = cfg.hidden_width();
  SigatModel m;
  m.motifs = cfg.motif_ids();
  std::uint64_t stream = 0;
  m.features = detail::uniform_tensor(num_nodes, d, 0.0, 1.0, derive_seed(cfg.seed, stream++));
  const double ar = std::sqrt(6.0 / static_cast<double>(2 * d + 1));
  for (std::size_t k = 0; k < m.motifs.size(); ++k) {
    m.transforms.push_back(detail::scaled_uniform(d, d, d, d, derive_seed(cfg.seed, stream++)));
    m.attention.push_back(detail::uniform_tensor(2 * d, 1, -ar, ar, derive_seed(cfg.seed, stream++)));
  }
  const std::size_t fused = (m.motifs.size() + 1) * d;
  m.w1 = detail::scaled_uniform(fused, h, fused, h, derive_seed(cfg.seed, stream++));
  m.b1 = Tensor2(1, h);
  m.w2 = detail::scaled_uniform(h, d, h, d, derive_seed(cfg.seed, stream++));
  m.b2 = Tensor2(1, d);
  return m;
}

inline SigatModel init_model(const SignedDigraph& g, const SigatConfig& cfg) { return init_model(g.num_nodes(), cfg); }

// ---------------------------------------------------------------------------
// Loss neighborhoods

struct LossNeighbors {
  Csr pos;
  Csr neg;
};

/// N(u)+ / N(u)- under the chosen direction rule. A node can be in both
/// sets when different edges to it carry different signs.
inline LossNeighbors loss_neighbors(const SignedDigraph& g, NeighborMode mode) {
  std::vector<std::pair<NodeId, NodeId>> pos, neg;
  for (const Edge& e : g.edges()) {
    auto& list = e.sign > 0 ? pos : neg;
    if (mode != NeighborMode::InOnly) list.emplace_back(e.src, e.dst);
    if (mode != NeighborMode::OutOnly) list.emplace_back(e.dst, e.src);
  }
  auto dedup = [n = g.num_nodes()](std::vector<std::pair<NodeId, NodeId>> p) {
    std::ranges::sort(p);
    p.erase(std::unique(p.begin(), p.end()), p.end());
    return Csr::from_pairs(n, std::move(p));
  };
  return {dedup(std::move(pos)), dedup(std::move(neg))};
}

/// "auto" Q: total positive over total negative neighbor count, clamped to [1, 100].
inline double auto_loss_balance(const LossNeighbors& ln) {
  if (ln.neg.size() == 0) return 1.0;
  const double q = static_cast<double>(ln.pos.size()) / static_cast<double>(ln.neg.size());
  return std::clamp(q, 1.0, 100.0);
}

// ---------------------------------------------------------------------------
// Forward pass on a tape

/// The model's parameters placed on a tape, as leaves that either collect
/// gradients (training) or not (inference).
struct ModelVars {
  ad::Var features;
  std::vector<ad::Var> transforms;
  std::vector<ad::Var> attention;
  ad::Var w1, b1, w2, b2;

  ModelVars(ad::Tape& t, const SigatModel& m, bool trainable, bool trainable_features) {
    auto leaf = [&](const Tensor2& x, bool grad) { return grad ? t.parameter(x) : t.constant(x); };
    features = leaf(m.features, trainable && trainable_features);
    for (const auto& w : m.transforms) transforms.push_back(leaf(w, trainable));
    for (const auto& a : m.attention) attention.push_back(leaf(a, trainable));
    w1 = leaf(m.w1, trainable);
    b1 = leaf(m.b1, trainable);
    w2 = leaf(m.w2, trainable);
    b2 = leaf(m.b2, trainable);
  }

  std::vector<ad::Var> all() const {
    std::vector<ad::Var> v{features};
    v.insert(v.end(), transforms.begin(), transforms.end());
    v.insert(v.end(), attention.begin(), attention.end());
    for (ad::Var x : {w1, b1, w2, b2}) v.push_back(x);
    return v;
  }
};

struct ForwardOptions {
  std::optional<std::size_t> neighbor_cap;
  Rng* sampler = nullptr;  // required when neighbor_cap is set
};

namespace detail {

/// Reusable dense node -> local-row map.
class LocalIndex {
 public:
  explicit LocalIndex(std::size_t n) : slot_(n, kNone) {}
  std::size_t insert(NodeId v) {
    if (slot_[v] == kNone) {
      slot_[v] = order_.size();
      order_.push_back(v);
    }
    return slot_[v];
  }
  const std::vector<NodeId>& order() const { return order_; }
  void clear() {
    for (NodeId v : order_) slot_[v] = kNone;
    order_.clear();
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> slot_;
  std::vector<NodeId> order_;
};

}  // namespace detail

/// Attention aggregation of motif block k for the target rows `targets`.
/// Returns |targets| x d; rows of targets with no neighbors are zero.
/// `alpha_out`, when given, receives the attention coefficient column.
inline ad::Var motif_block(ad::Tape& t, const ModelVars& vars, std::size_t k, int motif,
                           std::span<const NodeId> targets, const MotifNeighborhoods& nb, detail::LocalIndex& local,
                           const ForwardOptions& opt = {}, ad::Var* alpha_out = nullptr) {
  const std::size_t d = t.value(vars.features).cols();
  local.clear();
  ad::Index target_row;
  for (NodeId u : targets) target_row.push_back(local.insert(u));
  auto offsets = std::make_shared<ad::Index>();
  auto nbr = std::make_shared<ad::Index>();
  ad::Index tgt;
  offsets->push_back(0);
  std::vector<NodeId> sampled;
  for (std::size_t s = 0; s < targets.size(); ++s) {
    std::span<const NodeId> list = nb.neighbors(motif, targets[s]);
    if (opt.neighbor_cap && list.size() > *opt.neighbor_cap) {
      sampled.assign(list.begin(), list.end());
      for (std::size_t i = 0; i < *opt.neighbor_cap; ++i)
        std::swap(sampled[i], sampled[i + opt.sampler->below(sampled.size() - i)]);
      sampled.resize(*opt.neighbor_cap);
      list = sampled;
    }
    for (NodeId v : list) {
      nbr->push_back(local.insert(v));
      tgt.push_back(target_row[s]);
    }
    offsets->push_back(nbr->size());
  }
  if (nbr->empty()) {
    if (alpha_out) *alpha_out = t.constant(Tensor2(0, 1));
    return t.constant(Tensor2(targets.size(), d));
  }
  ad::Index rows(local.order().begin(), local.order().end());
  const ad::Var xu = ad::gather_rows(t, vars.features, std::move(rows));
  const ad::Var hu = ad::matmul(t, xu, vars.transforms[k]);
  const ad::Var a_src = ad::slice_rows(t, vars.attention[k], 0, d);
  const ad::Var a_nbr = ad::slice_rows(t, vars.attention[k], d, 2 * d);
  const ad::Var s_src = ad::matmul(t, hu, a_src);
  const ad::Var s_nbr = ad::matmul(t, hu, a_nbr);
  ad::Var logits = ad::add(t, ad::gather_rows(t, s_src, std::move(tgt)), ad::gather_rows(t, s_nbr, *nbr));
  logits = ad::leaky_relu(t, logits, kAttentionSlope);
  const ad::Var alpha = ad::segment_softmax(t, logits, offsets);
  if (alpha_out) *alpha_out = alpha;
  return ad::segment_weighted_sum(t, hu, alpha, nbr, offsets);
}

/// Z for `nodes`: W2 * tanh(W1 * [X(u), X_m1(u), ...] + b1) + b2, row per node.
inline ad::Var forward_rows(ad::Tape& t, const ModelVars& vars, const SigatModel& model, std::span<const NodeId> nodes,
                            const MotifNeighborhoods& nb, detail::LocalIndex& local, const ForwardOptions& opt = {}) {
  std::vector<ad::Var> blocks;
  blocks.push_back(ad::gather_rows(t, vars.features, ad::Index(nodes.begin(), nodes.end())));
  for (std::size_t k = 0; k < model.motifs.size(); ++k)
    blocks.push_back(motif_block(t, vars, k, model.motifs[k], nodes, nb, local, opt));
  const ad::Var fused = ad::concat_cols(t, blocks);
  const ad::Var hidden = ad::tanh(t, ad::add_row(t, ad::matmul(t, fused, vars.w1), vars.b1));
  return ad::add_row(t, ad::matmul(t, hidden, vars.w2), vars.b2);
}

/// X_m(u) for the k-th motif of the model.
inline std::vector<double> aggregate_motif(const SigatModel& model, std::size_t k, NodeId u,
                                           const MotifNeighborhoods& nb) {
  ad::Tape t;
  ModelVars vars(t, model, false, false);
  detail::LocalIndex local(model.num_nodes());
  const NodeId target[] = {u};
  const ad::Var out = motif_block(t, vars, k, model.motifs[k], target, nb, local);
  auto row = t.value(out).row(0);
  return {row.begin(), row.end()};
}

/// Attention coefficients of u over N_m(u) for the k-th motif, in neighbor-list order.
inline std::vector<double> attention_weights(const SigatModel& model, std::size_t k, NodeId u,
                                             const MotifNeighborhoods& nb) {
  ad::Tape t;
  ModelVars vars(t, model, false, false);
  detail::LocalIndex local(model.num_nodes());
  const NodeId target[] = {u};
  ad::Var alpha;
  motif_block(t, vars, k, model.motifs[k], target, nb, local, {}, &alpha);
  auto f = t.value(alpha).flat();
  return {f.begin(), f.end()};
}

inline std::vector<double> forward(const SigatModel& model, NodeId u, const MotifNeighborhoods& nb) {
  ad::Tape t;
  ModelVars vars(t, model, false, false);
  detail::LocalIndex local(model.num_nodes());
  const NodeId target[] = {u};
  auto row = t.value(forward_rows(t, vars, model, target, nb, local)).row(0);
  return {row.begin(), row.end()};
}

/// Z for every node (num_nodes x d), computed in chunks without sampling.
inline Tensor2 embed_all(const SigatModel& model, const MotifNeighborhoods& nb, std::size_t chunk = 1024) {
  Tensor2 z(model.num_nodes(), model.dim());
  detail::LocalIndex local(model.num_nodes());
  std::vector<NodeId> nodes;
  for (std::size_t start = 0; start < model.num_nodes(); start += chunk) {
    const std::size_t end = std::min(model.num_nodes(), start + chunk);
    nodes.clear();
    for (std::size_t u = start; u < end; ++u) nodes.push_back(static_cast<NodeId>(u));
    ad::Tape t;
    ModelVars vars(t, model, false, false);
    const Tensor2& part = t.value(forward_rows(t, vars, model, nodes, nb, local));
    for (std::size_t r = 0; r < part.rows(); ++r) std::ranges::copy(part.row(r), z.row(start + r).begin());
  }
  return z;
}

// ---------------------------------------------------------------------------
// Loss

/// Records J = sum over u in batch of
///   -sum_{v in N+(u)} log sigma(Z_u.Z_v) - Q sum_{v in N-(u)} log sigma(-Z_u.Z_v)
/// on the tape. Z of every batch node and every loss neighbor is computed in
/// the same pass, so all of them receive gradients.
inline ad::Var batch_loss_on_tape(ad::Tape& t, const ModelVars& vars, const SigatModel& model,
                                  std::span<const NodeId> batch, const LossNeighbors& ln, const MotifNeighborhoods& nb,
                                  double q, detail::LocalIndex& local, const ForwardOptions& opt = {}) {
  if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
  local.clear();
  ad::Index ia, ib;
  std::vector<double> sign, weight;
  for (NodeId u : batch) local.insert(u);
  for (NodeId u : batch) {
    const std::size_t lu = local.insert(u);
    for (NodeId v : ln.pos.row(u)) {
      ia.push_back(lu);
      ib.push_back(local.insert(v));
      sign.push_back(1.0);
      weight.push_back(-1.0);
    }
    for (NodeId v : ln.neg.row(u)) {
      ia.push_back(lu);
      ib.push_back(local.insert(v));
      sign.push_back(-1.0);
      weight.push_back(-q);
    }
  }
  if (ia.empty()) return t.constant(Tensor2::scalar(0.0));
  const std::vector<NodeId> nodes = local.order();
  const std::size_t e = ia.size();
  const ad::Var z = forward_rows(t, vars, model, nodes, nb, local, opt);
  const ad::Var dots = ad::pair_dot(t, z, std::move(ia), std::move(ib));
  const ad::Var ls = ad::log_sigmoid(t, ad::mul_const(t, dots, Tensor2(e, 1, std::move(sign))));
  return ad::sum(t, ad::mul_const(t, ls, Tensor2(e, 1, std::move(weight))));
}

inline double batch_loss(const SigatModel& model, std::span<const NodeId> batch, const SignedDigraph& g,
                         const MotifNeighborhoods& nb, double q, NeighborMode mode = NeighborMode::Union) {
  const LossNeighbors ln = loss_neighbors(g, mode);
  ad::Tape t;
  ModelVars vars(t, model, false, false);
  detail::LocalIndex local(model.num_nodes());
  return t.value(batch_loss_on_tape(t, vars, model, batch, ln, nb, q, local)).item();
}

/// Loss and gradients for every parameter group, in SigatModel::parameters() order.
struct LossAndGrad {
  double loss = 0.0;
  std::vector<Tensor2> grads;
};

inline LossAndGrad batch_loss_and_grad(const SigatModel& model, std::span<const NodeId> batch, const LossNeighbors& ln,
                                       const MotifNeighborhoods& nb, double q, bool trainable_features = true,
                                       const ForwardOptions& opt = {}) {
  ad::Tape t;
  ModelVars vars(t, model, true, trainable_features);
  detail::LocalIndex local(model.num_nodes());
  const ad::Var loss = batch_loss_on_tape(t, vars, model, batch, ln, nb, q, local, opt);
  LossAndGrad out;
  out.loss = t.value(loss).item();
  t.backward(loss);
  for (ad::Var v : vars.all()) out.grads.push_back(t.grad(v));
  return out;
}

// ---------------------------------------------------------------------------
// Training

struct TrainResult {
  SigatModel model;
  std::vector<double> loss_trace;  // total loss per epoch, summed over batches
  double loss_balance = 1.0;       // Q actually used
};

/// Called after each epoch with (1-based epoch, epoch total loss, current model).
using EpochCallback = std::function<void(std::size_t, double, const SigatModel&)>;

/// Mini-batch training. Each epoch visits every node once in batches of
/// cfg.batch_size (shuffled per epoch unless disabled) and takes one Adam
/// step per batch.
inline TrainResult train(const SignedDigraph& g, const MotifNeighborhoods& nb, const SigatConfig& cfg,
                         const EpochCallback& on_epoch = {}) {
  cfg.validate();
  for (int m : cfg.motif_ids())
    if (!nb.has(m)) throw std::invalid_argument("train: neighborhoods lack motif " + std::to_string(m));
  TrainResult r;
  r.model = init_model(g, cfg);
  const LossNeighbors ln = loss_neighbors(g, cfg.loss_neighbors);
  r.loss_balance = cfg.loss_balance.value_or(auto_loss_balance(ln));

  AdamState adam(AdamOptions{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
  Rng order_rng(derive_seed(cfg.seed, 1001));
  Rng sampler(derive_seed(cfg.seed, 1002));
  ForwardOptions fopt{cfg.neighbor_cap, &sampler};

  std::vector<NodeId> order(g.num_nodes());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<NodeId>(i);
  detail::LocalIndex local(g.num_nodes());

  auto params = r.model.parameters();
  if (cfg.freeze_features) params.erase(params.begin());

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle_batches) order_rng.shuffle(order);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::span<const NodeId> batch(order.data() + start, end - start);
      ad::Tape t;
      ModelVars vars(t, r.model, true, !cfg.freeze_features);
      ad::Var loss;
      try {
        loss = batch_loss_on_tape(t, vars, r.model, batch, ln, nb, r.loss_balance, local, fopt);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch starting at " + std::to_string(start) + ": " +
                           e.what());
      }
      const double value = t.value(loss).item();
      if (!std::isfinite(value)) throw NumericError("non-finite loss at epoch " + std::to_string(epoch));
      total += value;
      t.backward(loss);
      std::vector<Tensor2> grads;
      auto all = vars.all();
      for (std::size_t i = cfg.freeze_features ? 1 : 0; i < all.size(); ++i) grads.push_back(t.grad(all[i]));
      adam_step(adam, params, grads);
    }
    r.loss_trace.push_back(total);
    if (on_epoch) on_epoch(epoch, total, r.model);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Persistence
//
// Checkpoint: "SGAT" | u32 version=1 | u64 num_nodes | u64 dim | u64 hidden
//   | u32 motif count | motif ids (u32 each)
//   | tensors in parameter order, each u64 rows | u64 cols | rows*cols f64
// All little-endian.

inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void write_checkpoint(std::ostream& os, const SigatModel& m) {
  binio::put_magic(os, "SGAT");
  binio::put_u32(os, kCheckpointVersion);
  binio::put_u64(os, m.num_nodes());
  binio::put_u64(os, m.dim());
  binio::put_u64(os, m.hidden());
  binio::put_u32(os, static_cast<std::uint32_t>(m.motifs.size()));
  for (int id : m.motifs) binio::put_u32(os, static_cast<std::uint32_t>(id));
  for (const Tensor2* t : m.parameters()) {
    binio::put_u64(os, t->rows());
    binio::put_u64(os, t->cols());
    for (double x : t->flat()) binio::put_f64(os, x);
  }
}

inline SigatModel read_checkpoint(std::istream& is) {
  binio::expect_magic(is, "SGAT");
  if (binio::get_u32(is) != kCheckpointVersion) throw DataError("checkpoint: unsupported version");
  const auto n = binio::get_u64(is), d = binio::get_u64(is), h = binio::get_u64(is);
  const auto count = binio::get_u32(is);
  SigatModel m;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto id = binio::get_u32(is);
    if (id >= kNumMotifs) throw DataError("checkpoint: bad motif id");
    m.motifs.push_back(static_cast<int>(id));
  }
  m.features = Tensor2(n, d);
  m.transforms.assign(count, Tensor2(d, d));
  m.attention.assign(count, Tensor2(2 * d, 1));
  m.w1 = Tensor2((count + 1) * d, h);
  m.b1 = Tensor2(1, h);
  m.w2 = Tensor2(h, d);
  m.b2 = Tensor2(1, d);
  for (Tensor2* t : m.parameters()) {
    const auto r = binio::get_u64(is), c = binio::get_u64(is);
    if (r != t->rows() || c != t->cols()) throw DataError("checkpoint: tensor shape mismatch");
    for (double& x : t->flat()) x = binio::get_f64(is);
  }
  return m;
}

/// "node_id\tz_0\t...\tz_{d-1}" per node. `labels` maps dense ids to the
/// ids written out (e.g. original file ids); empty means dense ids.
inline void write_embeddings_tsv(std::ostream& os, const Tensor2& z, std::span<const std::int64_t> labels = {}) {
  os.precision(17);
  for (std::size_t r = 0; r < z.rows(); ++r) {
    if (labels.empty()) os << r;
    else os << labels[r];
    for (std::size_t c = 0; c < z.cols(); ++c) os << '\t' << z(r, c);
    os << '\n';
  }
}

}  // namespace sigat

#endif  // SIGAT_MODEL_HPP
