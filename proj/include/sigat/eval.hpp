#ifndef SIGAT_EVAL_HPP
#define SIGAT_EVAL_HPP

#include <chrono>
#include <cstdio>
#include <functional>
#include <future>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigat/graph.hpp"
#include "sigat/logreg.hpp"
#include "sigat/metrics.hpp"
#include "sigat/model.hpp"
#include "sigat/motif.hpp"

namespace sigat {

/// Row e is concat(Z_src, Z_dst) for edge edges[e]; label 1 for positive sign.
inline EdgeDataset build_edge_dataset(const SignedDigraph& g, std::span<const EdgeIndex> edges, const Tensor2& z) {
  const std::size_t d = z.cols();
  EdgeDataset ds{Tensor2(edges.size(), 2 * d), std::vector<int>(edges.size())};
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = g.edge(edges[i]);
    auto row = ds.features.row(i);
    std::ranges::copy(z.row(e.src), row.begin());
    std::ranges::copy(z.row(e.dst), row.begin() + static_cast<std::ptrdiff_t>(d));
    ds.labels[i] = e.sign > 0 ? 1 : 0;
  }
  return ds;
}

/// Uniform [0,1) node vectors.
inline Tensor2 random_baseline(std::size_t num_nodes, std::size_t d, std::uint64_t seed) {
  return detail::uniform_tensor(num_nodes, d, 0.0, 1.0, seed);
}

enum class EmbeddingBackend { Sigat, Random };

struct CvOptions {
  std::size_t k = 5;
  std::uint64_t seed = 0;  // fold assignment
  EmbeddingBackend backend = EmbeddingBackend::Sigat;
  LogregOptions logreg;
  std::size_t threads = 1;  // folds run concurrently when > 1
  std::function<void(const std::string&)> log;
};

struct FoldResult {
  int fold = 0;
  Metrics metrics;
  bool classifier_degenerate = false;
  double loss_balance = 0.0;
  std::vector<double> loss_trace;
  std::size_t train_edges = 0;
  std::size_t test_edges = 0;
  double seconds = 0.0;
};

struct EvalReport {
  std::string method;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::vector<FoldResult> folds;
  Metrics mean;
};

/// Test-edge probabilities from a classifier fit on the training edges.
struct LinkSignResult {
  Metrics metrics;
  bool classifier_degenerate = false;
};

inline LinkSignResult evaluate_link_sign(const SignedDigraph& g, const EdgeSplit& split, const Tensor2& z,
                                         const LogregOptions& opt) {
  const EdgeDataset train = build_edge_dataset(g, split.train_edges, z);
  const EdgeDataset test = build_edge_dataset(g, split.test_edges, z);
  const LogisticModel clf = train_logreg(train, opt);
  const std::vector<double> scores = clf.predict_proba(test.features);
  return {metrics(scores, test.labels), clf.degenerate};
}

/// Embedding for one split: trains on the train edges only.
struct FoldEmbedding {
  Tensor2 z;
  double loss_balance = 0.0;
  std::vector<double> loss_trace;
};

inline FoldEmbedding embed_for_split(const SignedDigraph& g, const EdgeSplit& split, const SigatConfig& cfg,
                                     EmbeddingBackend backend, std::uint64_t seed, const EpochCallback& on_epoch = {}) {
  if (backend == EmbeddingBackend::Random) return {random_baseline(g.num_nodes(), cfg.dim, seed), 0.0, {}};
  const SignedDigraph train_graph = subgraph_from_edges(g, split.train_edges);
  // Construction audit: only training edges reach motif extraction and training.
  if (train_graph.num_edges() + split.test_edges.size() != g.num_edges())
    throw std::logic_error("train subgraph does not exclude exactly the test edges");
  const MotifNeighborhoods nb = extract(train_graph, cfg.motif_ids());
  SigatConfig fold_cfg = cfg;
  fold_cfg.seed = seed;
  TrainResult tr = train(train_graph, nb, fold_cfg, on_epoch);
  return {embed_all(tr.model, nb), tr.loss_balance, std::move(tr.loss_trace)};
}

inline Metrics mean_metrics(const std::vector<FoldResult>& folds) {
  Metrics m{0, 0, 0, 0, false};
  for (const auto& f : folds) {
    m.accuracy += f.metrics.accuracy;
    m.f1 += f.metrics.f1;
    m.macro_f1 += f.metrics.macro_f1;
    m.auc += f.metrics.auc;
    m.auc_undefined |= f.metrics.auc_undefined;
  }
  const double k = static_cast<double>(folds.size());
  m.accuracy /= k, m.f1 /= k, m.macro_f1 /= k, m.auc /= k;
  return m;
}

/// Link sign prediction over the given folds. Per fold: train subgraph -> motifs ->
/// embedding -> logistic regression on train edges -> metrics on test edges.
inline EvalReport run_cv_on_splits(const SignedDigraph& g, const SigatConfig& cfg, const CvOptions& opt,
                                    const std::vector<EdgeSplit>& splits) {
  EvalReport report;
  report.method = opt.backend == EmbeddingBackend::Random ? "Random"
                  : cfg.motif_subset == MotifSubset::All38 ? "SiGAT"
                                                           : "SiGAT+/-";
  report.k = splits.size();
  report.seed = opt.seed;
  report.config = cfg;
  report.config["backend"] = opt.backend == EmbeddingBackend::Random ? "random" : "sigat";
  report.config["l2_c"] = opt.logreg.l2_c;
  report.config["logreg_max_iter"] = opt.logreg.max_iter;

  auto run_fold = [&](const EdgeSplit& split) {
    const auto t0 = std::chrono::steady_clock::now();
    FoldResult fr;
    fr.fold = split.fold_id;
    const std::uint64_t fold_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(split.fold_id));
    FoldEmbedding emb = embed_for_split(g, split, cfg, opt.backend, fold_seed);
    const LinkSignResult r = evaluate_link_sign(g, split, emb.z, opt.logreg);
    fr.metrics = r.metrics;
    fr.classifier_degenerate = r.classifier_degenerate;
    fr.loss_balance = emb.loss_balance;
    fr.loss_trace = std::move(emb.loss_trace);
    fr.train_edges = split.train_edges.size();
    fr.test_edges = split.test_edges.size();
    fr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return fr;
  };

  report.folds.resize(splits.size());
  const std::size_t threads = std::max<std::size_t>(1, opt.threads);
  for (std::size_t start = 0; start < splits.size(); start += threads) {
    const std::size_t end = std::min(splits.size(), start + threads);
    if (threads == 1) {
      report.folds[start] = run_fold(splits[start]);
    } else {
      std::vector<std::future<FoldResult>> running;
      for (std::size_t f = start; f < end; ++f)
        running.push_back(std::async(std::launch::async, run_fold, std::cref(splits[f])));
      for (std::size_t f = start; f < end; ++f) report.folds[f] = running[f - start].get();
    }
    if (opt.log)
      for (std::size_t f = start; f < end; ++f) {
        const auto& m = report.folds[f].metrics;
        std::ostringstream s;
        s << std::fixed << std::setprecision(4) << "fold " << f << ": acc " << m.accuracy << " f1 " << m.f1
          << " macro-f1 " << m.macro_f1 << " auc " << m.auc << " (" << std::setprecision(1)
          << report.folds[f].seconds << "s)";
        opt.log(s.str());
      }
  }
  report.mean = mean_metrics(report.folds);
  return report;
}

inline EvalReport run_cv(const SignedDigraph& g, const SigatConfig& cfg, const CvOptions& opt) {
  return run_cv_on_splits(g, cfg, opt, make_folds(g, opt.k, opt.seed));
}

// ---------------------------------------------------------------------------
// Output

inline nlohmann::json to_json(const Metrics& m) {
  return {{"accuracy", m.accuracy}, {"f1", m.f1}, {"macro_f1", m.macro_f1}, {"auc", m.auc}};
}

/// Report JSON. Timings are wall-clock and therefore left out unless asked
/// for, so that reruns of the same configuration compare byte-for-byte.
inline nlohmann::json to_json(const EvalReport& r, bool include_timings = false) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : r.folds) {
    nlohmann::json j = {{"fold", f.fold},
                        {"metrics", to_json(f.metrics)},
                        {"auc_undefined", f.metrics.auc_undefined},
                        {"classifier_degenerate", f.classifier_degenerate},
                        {"train_edges", f.train_edges},
                        {"test_edges", f.test_edges},
                        {"loss_trace", f.loss_trace}};
    if (r.config.value("backend", "sigat") == "sigat") j["loss_balance"] = f.loss_balance;
    if (include_timings) j["seconds"] = f.seconds;
    folds.push_back(std::move(j));
  }
  return {{"method", r.method}, {"k", r.k},         {"seed", r.seed},
          {"config", r.config}, {"folds", folds}, {"mean", to_json(r.mean)}};
}

/// Metric rows in the layout of a results table: one row per metric, one
/// column per method.
inline std::string format_table(const std::string& dataset, const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  os << std::left << std::setw(16) << "Dataset" << std::setw(10) << "Metric";
  for (const auto& r : reports) os << std::right << std::setw(10) << r.method;
  os << '\n';
  const char* names[] = {"Accuracy", "F1", "Macro-F1", "AUC"};
  for (int row = 0; row < 4; ++row) {
    os << std::left << std::setw(16) << (row == 0 ? dataset : "") << std::setw(10) << names[row];
    for (const auto& r : reports) {
      const double v = row == 0 ? r.mean.accuracy : row == 1 ? r.mean.f1 : row == 2 ? r.mean.macro_f1 : r.mean.auc;
      os << std::right << std::setw(10) << std::fixed << std::setprecision(4) << v;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace sigat

#endif  // SIGAT_EVAL_HPP
