#ifndef SIGAT_CLI_HPP
#define SIGAT_CLI_HPP

// Command-line front end. Everything except the network transport used by
// `fetch` lives here so the commands can be driven from tests.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "sigat/sigat.hpp"

namespace sigat::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

/// Fetches `url` into `dest`. Throws DataError on failure.
using Downloader = std::function<void(const std::string& url, const fs::path& dest)>;

struct DatasetInfo {
  std::string name;
  std::string url;
  std::string file_name;
  EdgeFormat format;
  std::size_t nodes;
  std::size_t edges;
  std::size_t default_epochs;
};

inline const std::vector<DatasetInfo>& known_datasets() {
  static const std::vector<DatasetInfo> d = {
      {"bitcoin-alpha", "https://snap.stanford.edu/data/soc-sign-bitcoinalpha.csv.gz", "soc-sign-bitcoinalpha.csv.gz",
       EdgeFormat::WeightedCsv, 3783, 24186, 100},
      {"slashdot", "https://snap.stanford.edu/data/soc-sign-Slashdot090221.txt.gz", "soc-sign-Slashdot090221.txt.gz",
       EdgeFormat::SnapTsv, 82140, 549202, 20},
      {"epinions", "https://snap.stanford.edu/data/soc-sign-epinions.txt.gz", "soc-sign-epinions.txt.gz",
       EdgeFormat::SnapTsv, 131828, 841372, 10},
  };
  return d;
}

/// Matches a dataset by explicit name, else by the input file name.
inline const DatasetInfo* find_dataset(const std::string& name, const fs::path& input = {}) {
  auto lower = [](std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  for (const auto& d : known_datasets())
    if (lower(name) == d.name) return &d;
  const std::string file = lower(input.filename().string());
  if (file.find("bitcoinalpha") != std::string::npos || file.find("bitcoin-alpha") != std::string::npos)
    return &known_datasets()[0];
  if (file.find("slashdot") != std::string::npos) return &known_datasets()[1];
  if (file.find("epinions") != std::string::npos) return &known_datasets()[2];
  return nullptr;
}

// ---------------------------------------------------------------------------
// Files

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
inline void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot write " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw DataError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

struct InputGraph {
  fs::path path;
  EdgeFormat format = EdgeFormat::SnapTsv;
  std::string content_hash;  // FNV-1a 64 of the decompressed bytes
  LoadedGraph loaded;
};

inline InputGraph load_input(const fs::path& path, const std::string& format_name) {
  InputGraph in;
  in.path = path;
  if (format_name.empty()) {
    in.format = guess_edge_format(path);
  } else {
    auto f = parse_edge_format(format_name);
    if (!f) throw std::invalid_argument("unknown format '" + format_name + "'");
    in.format = *f;
  }
  if (!fs::exists(path)) throw DataError("input not found: " + path.string());
  const std::string bytes = read_file_bytes(path);
  Fnv1a h;
  h.update(bytes);
  in.content_hash = hex64(h.digest());
  std::istringstream is(bytes);
  try {
    in.loaded = read_edge_list(is, in.format);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path.string());
  }
  return in;
}

inline nlohmann::json graph_summary(const InputGraph& in) {
  const auto& g = in.loaded.graph;
  const auto& s = in.loaded.stats;
  return {{"path", in.path.string()},
          {"format", to_string(in.format)},
          {"fnv1a64", in.content_hash},
          {"nodes", g.num_nodes()},
          {"edges", g.num_edges()},
          {"positive", g.num_positive()},
          {"negative", g.num_negative()},
          {"graph_hash", hex64(g.content_hash())},
          {"lines", s.lines},
          {"self_loops_dropped", s.self_loops},
          {"duplicates_dropped", s.duplicates}};
}

// ---------------------------------------------------------------------------
// Options

struct Options {
  std::string input;
  std::string format;
  std::string out = "sigat-out";
  std::string dataset;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool quiet = false;

  // model
  SigatConfig sigat;
  std::optional<std::size_t> epochs;
  std::string loss_balance = "auto";
  std::string motifs = "all38";
  std::string loss_neighbors = "union";
  std::size_t neighbor_cap = 0;
  bool no_shuffle = false;

  // evaluation
  std::size_t k = 5;
  double l2_c = 1.0;
  std::size_t logreg_max_iter = 100;
  std::string splits;
  std::string method = "random";

  // sweep
  std::string sweep = "both";
  std::vector<std::size_t> epoch_list{10, 20, 50, 100};
  std::vector<std::size_t> dim_list{5, 10, 20, 40};
  double test_fraction = 0.2;

  // motif cache
  std::string motif_cache;

  // fetch
  std::string dest = "data";
  bool force = false;
  bool no_verify = false;
};

/// Resolves string-valued model options into `o.sigat`. Throws
/// std::invalid_argument on bad values.
inline SigatConfig resolve_config(const Options& o) {
  SigatConfig c = o.sigat;
  c.seed = o.seed;
  if (o.epochs) {
    c.epochs = *o.epochs;
  } else if (const DatasetInfo* d = find_dataset(o.dataset, o.input)) {
    c.epochs = d->default_epochs;
  }
  if (o.loss_balance == "auto") {
    c.loss_balance.reset();
  } else {
    std::size_t used = 0;
    double q = 0.0;
    try {
      q = std::stod(o.loss_balance, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != o.loss_balance.size()) throw std::invalid_argument("loss-balance must be 'auto' or a number");
    c.loss_balance = q;
  }
  auto subset = parse_motif_subset(o.motifs);
  if (!subset) throw std::invalid_argument("motifs must be all38 or plusminus2");
  c.motif_subset = *subset;
  auto mode = parse_neighbor_mode(o.loss_neighbors);
  if (!mode) throw std::invalid_argument("loss-neighbors must be union, out or in");
  c.loss_neighbors = *mode;
  if (o.neighbor_cap) c.neighbor_cap = o.neighbor_cap;
  c.shuffle_batches = !o.no_shuffle;
  c.validate();
  return c;
}

inline LogregOptions logreg_options(const Options& o) {
  LogregOptions l;
  l.l2_c = o.l2_c;
  l.max_iter = o.logreg_max_iter;
  if (!(l.l2_c > 0.0)) throw std::invalid_argument("l2-c must be > 0");
  return l;
}

inline nlohmann::json options_json(const Options& o) {
  return {{"input", o.input},
          {"format", o.format},
          {"out", o.out},
          {"dataset", o.dataset},
          {"seed", o.seed},
          {"threads", o.threads},
          {"k", o.k},
          {"l2_c", o.l2_c},
          {"logreg_max_iter", o.logreg_max_iter},
          {"splits", o.splits},
          {"method", o.method},
          {"sweep", o.sweep},
          {"epoch_list", o.epoch_list},
          {"dim_list", o.dim_list},
          {"test_fraction", o.test_fraction},
          {"motif_cache", o.motif_cache}};
}

// ---------------------------------------------------------------------------
// Shared command pieces

class Run {
 public:
  Run(std::string command, const Options& o, std::ostream& log) : command_(std::move(command)), opt_(o), log_(log) {
    fs::create_directories(o.out);
  }

  void info(const std::string& msg) const {
    if (!opt_.quiet) log_ << msg << '\n';
  }

  fs::path path(const std::string& name) {
    outputs_.push_back(name);
    return fs::path(opt_.out) / name;
  }

  void write(const std::string& name, const std::string& content) { write_atomic(path(name), content); }

  /// Resolved configuration, input hashes and output list. Contains nothing
  /// run-dependent, so identical invocations give identical manifests.
  void write_manifest(const nlohmann::json& inputs, const nlohmann::json& extra = nlohmann::json::object()) {
    nlohmann::json m = {{"command", command_}, {"options", options_json(opt_)}, {"inputs", inputs}};
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    outputs_.push_back("manifest.json");
    m["outputs"] = outputs_;
    write_atomic(fs::path(opt_.out) / "manifest.json", json_text(m));
  }

 private:
  std::string command_;
  const Options& opt_;
  std::ostream& log_;
  std::vector<std::string> outputs_;
};

/// Motif neighborhoods for `g`, read from `cache` when it matches the graph
/// and written there otherwise.
inline MotifNeighborhoods motifs_for(const SignedDigraph& g, std::span<const int> ids, const std::string& cache,
                                     const Run& run) {
  const std::uint64_t hash = g.content_hash();
  if (!cache.empty() && fs::exists(cache)) {
    std::ifstream is(cache, std::ios::binary);
    try {
      MotifNeighborhoods nb = read_motif_cache(is, hash);
      bool complete = true;
      for (int m : ids) complete = complete && nb.has(m);
      if (complete) {
        run.info("motif cache hit: " + cache);
        return nb;
      }
    } catch (const DataError& e) {
      run.info(std::string("motif cache ignored: ") + e.what());
    }
  }
  MotifNeighborhoods nb = extract(g, ids);
  if (!cache.empty()) {
    std::ostringstream os;
    write_motif_cache(os, nb, hash);
    write_atomic(cache, os.str());
  }
  return nb;
}

inline std::string loss_csv(const std::vector<double>& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,loss\n";
  for (std::size_t i = 0; i < trace.size(); ++i) os << i + 1 << ',' << trace[i] << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Commands

inline int cmd_census(const Options& o, std::ostream& out, std::ostream& log) {
  const InputGraph in = load_input(o.input, o.format);
  Run run("census", o, log);
  const auto ids = all_motifs();
  const MotifNeighborhoods nb = motifs_for(in.loaded.graph, ids, o.motif_cache, run);
  const auto counts = census(nb);
  nlohmann::json rows = nlohmann::json::array();
  for (const MotifId& m : catalog())
    rows.push_back({{"motif_id", m.id}, {"descriptor", m.descriptor()}, {"edge_count", counts[static_cast<std::size_t>(m.id)]}});
  run.write("census.json", json_text(rows));
  run.write_manifest(nlohmann::json::array({graph_summary(in)}));
  for (const auto& r : rows)
    out << std::setw(3) << r["motif_id"].get<int>() << "  " << std::left << std::setw(34)
        << r["descriptor"].get<std::string>() << std::right << r["edge_count"].get<std::size_t>() << '\n';
  return kOk;
}

inline int cmd_train(const Options& o, std::ostream& out, std::ostream& log) {
  const SigatConfig cfg = resolve_config(o);
  const InputGraph in = load_input(o.input, o.format);
  const SignedDigraph& g = in.loaded.graph;
  Run run("train", o, log);
  const auto ids = cfg.motif_ids();
  const MotifNeighborhoods nb = motifs_for(g, ids, o.motif_cache, run);
  const TrainResult tr = train(g, nb, cfg, [&](std::size_t e, double loss, const SigatModel&) {
    run.info("epoch " + std::to_string(e) + " loss " + std::to_string(loss));
  });
  const Tensor2 z = embed_all(tr.model, nb);

  std::ostringstream tsv;
  write_embeddings_tsv(tsv, z, in.loaded.original_ids);
  run.write("embeddings.tsv", tsv.str());
  nlohmann::json sidecar = {{"config", cfg},
                            {"seed", cfg.seed},
                            {"num_nodes", z.rows()},
                            {"dim", z.cols()},
                            {"loss_balance", tr.loss_balance},
                            {"loss_trace", tr.loss_trace},
                            {"ids", "original"}};
  run.write("embeddings.json", json_text(sidecar));
  std::ostringstream ckpt;
  write_checkpoint(ckpt, tr.model);
  run.write("model.ckpt", ckpt.str());
  run.write("loss.csv", loss_csv(tr.loss_trace));
  run.write_manifest(nlohmann::json::array({graph_summary(in)}), {{"sigat_config", cfg}});
  out << "trained " << cfg.epochs << " epochs, final loss " << tr.loss_trace.back() << '\n';
  return kOk;
}

inline int evaluate(const std::string& command, const Options& o, EmbeddingBackend backend, std::ostream& out,
                    std::ostream& log) {
  const SigatConfig cfg = resolve_config(o);
  const LogregOptions lr = logreg_options(o);
  if (o.k < 2) throw std::invalid_argument("k must be >= 2");
  const InputGraph in = load_input(o.input, o.format);
  const SignedDigraph& g = in.loaded.graph;
  if (o.k > g.num_edges()) throw DataError("k exceeds the number of edges");
  Run run(command, o, log);

  CvOptions cv;
  cv.k = o.k;
  cv.seed = o.seed;
  cv.backend = backend;
  cv.logreg = lr;
  cv.threads = o.threads;
  cv.log = [&](const std::string& s) { run.info(s); };

  nlohmann::json inputs = nlohmann::json::array({graph_summary(in)});
  std::vector<EdgeSplit> splits;
  if (!o.splits.empty()) {
    std::ifstream is(o.splits);
    if (!is) throw DataError("cannot read split manifest " + o.splits);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("split manifest " + o.splits + ": " + e.what());
    }
    splits = splits_from_manifest(j, g.num_edges());
    if (splits.size() < 2) throw DataError("split manifest needs at least 2 folds");
    std::ostringstream dump;
    dump << j.dump();
    Fnv1a h;
    h.update(dump.str());
    inputs.push_back({{"path", o.splits}, {"kind", "split-manifest"}, {"fnv1a64", hex64(h.digest())}});
  }
  const EvalReport report = splits.empty() ? run_cv(g, cfg, cv) : run_cv_on_splits(g, cfg, cv, splits);
  if (splits.empty()) splits = make_folds(g, o.k, o.seed);

  run.write("splits.json", json_text(split_manifest(splits, splits.front().seed)));
  run.write("report.json", json_text(to_json(report)));
  const std::string dataset = find_dataset(o.dataset, o.input) ? find_dataset(o.dataset, o.input)->name
                                                               : fs::path(o.input).stem().string();
  const std::string table = format_table(dataset, {report});
  run.write("report.txt", table);
  run.write_manifest(inputs, {{"sigat_config", cfg}});
  out << table;
  return kOk;
}

inline int cmd_eval_cv(const Options& o, std::ostream& out, std::ostream& log) {
  return evaluate("eval-cv", o, EmbeddingBackend::Sigat, out, log);
}

inline int cmd_baseline(const Options& o, std::ostream& out, std::ostream& log) {
  if (o.method != "random") throw std::invalid_argument("baseline method must be 'random'");
  return evaluate("baseline", o, EmbeddingBackend::Random, out, log);
}

inline int cmd_sweep(const Options& o, std::ostream& out, std::ostream& log) {
  const SigatConfig base = resolve_config(o);
  const LogregOptions lr = logreg_options(o);
  const bool do_epochs = o.sweep == "epochs" || o.sweep == "both";
  const bool do_dims = o.sweep == "dims" || o.sweep == "both";
  if (!do_epochs && !do_dims) throw std::invalid_argument("sweep must be epochs, dims or both");
  if (do_epochs && o.epoch_list.empty()) throw std::invalid_argument("epoch list is empty");
  if (do_dims && o.dim_list.empty()) throw std::invalid_argument("dimension list is empty");
  for (std::size_t e : o.epoch_list)
    if (e < 1) throw std::invalid_argument("epoch list entries must be >= 1");
  for (std::size_t d : o.dim_list)
    if (d < 1) throw std::invalid_argument("dimension list entries must be >= 1");
  if (!(o.test_fraction > 0.0 && o.test_fraction < 1.0)) throw std::invalid_argument("test-fraction must be in (0, 1)");

  const InputGraph in = load_input(o.input, o.format);
  const SignedDigraph& g = in.loaded.graph;
  Run run("sweep", o, log);
  const EdgeSplit split = make_holdout(g, o.test_fraction, o.seed);
  const SignedDigraph train_graph = subgraph_from_edges(g, split.train_edges);
  const MotifNeighborhoods nb = extract(train_graph, base.motif_ids());
  auto test_auc = [&](const SigatModel& m) {
    return evaluate_link_sign(g, split, embed_all(m, nb), lr).metrics.auc;
  };

  if (do_epochs) {
    std::vector<std::size_t> marks = o.epoch_list;
    std::ranges::sort(marks);
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
    SigatConfig cfg = base;
    cfg.epochs = marks.back();
    std::ostringstream csv;
    csv.precision(17);
    csv << "epoch,loss,auc\n";
    train(train_graph, nb, cfg, [&](std::size_t e, double loss, const SigatModel& m) {
      if (!std::ranges::binary_search(marks, e)) return;
      const double auc = test_auc(m);
      csv << e << ',' << loss << ',' << auc << '\n';
      run.info("epoch " + std::to_string(e) + " loss " + std::to_string(loss) + " auc " + std::to_string(auc));
    });
    run.write("epoch_curve.csv", csv.str());
  }
  if (do_dims) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "dim,auc\n";
    for (std::size_t d : o.dim_list) {
      SigatConfig cfg = base;
      cfg.dim = d;
      const double auc = test_auc(train(train_graph, nb, cfg).model);
      csv << d << ',' << auc << '\n';
      run.info("dim " + std::to_string(d) + " auc " + std::to_string(auc));
    }
    run.write("dim_curve.csv", csv.str());
  }
  run.write("splits.json", json_text(split_manifest({split}, o.seed)));
  run.write_manifest(nlohmann::json::array({graph_summary(in)}), {{"sigat_config", base}});
  out << "sweep written to " << o.out << '\n';
  return kOk;
}

inline int cmd_fetch(const Options& o, const Downloader& download, std::ostream& out, std::ostream& log) {
  std::vector<const DatasetInfo*> wanted;
  if (o.dataset == "all") {
    for (const auto& d : known_datasets()) wanted.push_back(&d);
  } else if (const DatasetInfo* d = find_dataset(o.dataset)) {
    wanted.push_back(d);
  } else {
    throw std::invalid_argument("unknown dataset '" + o.dataset + "' (bitcoin-alpha, slashdot, epinions, all)");
  }
  fs::create_directories(o.dest);
  for (const DatasetInfo* d : wanted) {
    const fs::path target = fs::path(o.dest) / d->file_name;
    if (o.force || !fs::exists(target)) {
      if (!download) throw DataError("no downloader available");
      if (!o.quiet) log << "downloading " << d->url << '\n';
      const fs::path tmp = target.string() + ".part";
      download(d->url, tmp);
      fs::rename(tmp, target);
    }
    if (o.no_verify) {
      out << d->name << ": " << target.string() << " (not verified)\n";
      continue;
    }
    const InputGraph in = load_input(target, to_string(d->format));
    const auto& g = in.loaded.graph;
    if (g.num_nodes() != d->nodes || g.num_edges() != d->edges)
      throw DataError(d->name + ": expected " + std::to_string(d->nodes) + " nodes / " + std::to_string(d->edges) +
                      " edges, found " + std::to_string(g.num_nodes()) + " / " + std::to_string(g.num_edges()));
    out << d->name << ": " << target.string() << " ok (" << g.num_nodes() << " nodes, " << g.num_edges()
        << " edges, fnv1a64 " << in.content_hash << ")\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// Argument handling

/// Reads "key = value" lines ('#' comments) and returns them as "--key=value"
/// tokens. Placed ahead of the real arguments, so explicit flags win.
inline std::vector<std::string> config_tokens(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot read config file " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    const std::string_view t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument(path.string() + ":" + std::to_string(n) + ": expected key = value");
    const std::string_view key = detail::trim(t.substr(0, eq));
    const std::string_view value = detail::trim(t.substr(eq + 1));
    if (key.empty() || key == "config")
      throw std::invalid_argument(path.string() + ":" + std::to_string(n) + ": bad key");
    tokens.push_back("--" + std::string(key) + "=" + std::string(value));
  }
  return tokens;
}

inline void add_input_options(CLI::App* s, Options& o) {
  s->add_option("-i,--input", o.input, "Edge list (snap-tsv or weighted-csv, optionally .gz)")->required();
  s->add_option("--format", o.format, "snap-tsv | weighted-csv (default: from file name)");
  s->add_option("-o,--out", o.out, "Output directory")->capture_default_str();
  s->add_option("--dataset", o.dataset, "bitcoin-alpha | slashdot | epinions (sets default epochs)");
  s->add_flag("-q,--quiet", o.quiet, "No progress output");
}

inline void add_model_options(CLI::App* s, Options& o) {
  s->add_option("--seed", o.seed, "Seed for init, batching and folds")->capture_default_str();
  s->add_option("--dim", o.sigat.dim, "Embedding dimension d")->capture_default_str();
  s->add_option("--hidden", o.sigat.hidden, "Fusion hidden width (0 = d)")->capture_default_str();
  s->add_option("--epochs", o.epochs, "Epochs (default: per dataset, else 100)");
  s->add_option("--batch-size", o.sigat.batch_size, "Nodes per batch")->capture_default_str();
  s->add_option("--lr", o.sigat.lr, "Adam learning rate")->capture_default_str();
  s->add_option("--weight-decay", o.sigat.weight_decay, "L2 weight decay")->capture_default_str();
  s->add_option("--loss-balance", o.loss_balance, "Q: 'auto' or a positive number")->capture_default_str();
  s->add_option("--motifs", o.motifs, "all38 | plusminus2")->capture_default_str();
  s->add_option("--loss-neighbors", o.loss_neighbors, "union | out | in")->capture_default_str();
  s->add_option("--neighbor-cap", o.neighbor_cap, "Subsample motif neighborhoods to this size (0 = off)");
  s->add_flag("--no-shuffle", o.no_shuffle, "Visit nodes in id order every epoch");
  s->add_flag("--freeze-features", o.sigat.freeze_features, "Keep X at its random initialization");
  s->add_option("--motif-cache", o.motif_cache, "Binary motif cache to read or create");
}

inline void add_eval_options(CLI::App* s, Options& o) {
  s->add_option("-k,--folds", o.k, "Cross-validation folds")->capture_default_str();
  s->add_option("--l2-c", o.l2_c, "Logistic regression inverse L2 strength")->capture_default_str();
  s->add_option("--logreg-max-iter", o.logreg_max_iter, "Newton iteration cap")->capture_default_str();
  s->add_option("--splits", o.splits, "Reuse folds from a split manifest JSON");
  s->add_option("--threads", o.threads, "Folds run concurrently (1 = deterministic order)")->capture_default_str();
}

/// Runs one command line. `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr,
               const Downloader& download = {}) {
  // expand --config FILE in place, after the subcommand name
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string file;
    std::size_t width = 0;
    if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1], width = 2;
    else if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9), width = 1;
    if (!width) continue;
    std::vector<std::string> tokens;
    try {
      tokens = config_tokens(file);
    } catch (const std::invalid_argument& e) {
      err << "error: " << e.what() << '\n';
      return kUsage;
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + width));
    const std::size_t at = args.empty() ? 0 : 1;
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), tokens.begin(), tokens.end());
    break;
  }

  Options o;
  CLI::App app{"Signed graph attention embeddings for link sign prediction", "sigat"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every command");
  app.footer("Any command accepts --config FILE with 'key = value' lines naming its flags; explicit flags win.");

  auto* fetch = app.add_subcommand("fetch", "Download and verify the public datasets");
  fetch->add_option("--dataset", o.dataset, "bitcoin-alpha | slashdot | epinions | all")->required();
  fetch->add_option("--dest", o.dest, "Target directory")->capture_default_str();
  fetch->add_flag("--force", o.force, "Download even if the file exists");
  fetch->add_flag("--no-verify", o.no_verify, "Skip the node/edge count check");
  fetch->add_flag("-q,--quiet", o.quiet, "No progress output");

  auto* census_cmd = app.add_subcommand("census", "Count motif neighbors per motif");
  add_input_options(census_cmd, o);
  census_cmd->add_option("--motif-cache", o.motif_cache, "Binary motif cache to read or create");

  auto* train_cmd = app.add_subcommand("train", "Train on every edge and write embeddings");
  add_input_options(train_cmd, o);
  add_model_options(train_cmd, o);

  auto* eval_cmd = app.add_subcommand("eval-cv", "k-fold link sign prediction with SiGAT embeddings");
  add_input_options(eval_cmd, o);
  add_model_options(eval_cmd, o);
  add_eval_options(eval_cmd, o);

  auto* sweep_cmd = app.add_subcommand("sweep", "Epoch and dimension curves on an 80/20 split");
  add_input_options(sweep_cmd, o);
  add_model_options(sweep_cmd, o);
  sweep_cmd->add_option("--sweep", o.sweep, "epochs | dims | both")->capture_default_str();
  sweep_cmd->add_option("--epoch-list", o.epoch_list, "Epochs at which to record AUC")->delimiter(',');
  sweep_cmd->add_option("--dim-list", o.dim_list, "Dimensions to train")->delimiter(',');
  sweep_cmd->add_option("--test-fraction", o.test_fraction, "Held-out edge share")->capture_default_str();
  sweep_cmd->add_option("--l2-c", o.l2_c, "Logistic regression inverse L2 strength")->capture_default_str();
  sweep_cmd->add_option("--logreg-max-iter", o.logreg_max_iter, "Newton iteration cap")->capture_default_str();

  auto* base_cmd = app.add_subcommand("baseline", "k-fold link sign prediction with a baseline embedding");
  add_input_options(base_cmd, o);
  add_model_options(base_cmd, o);
  add_eval_options(base_cmd, o);
  base_cmd->add_option("--method", o.method, "random")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (fetch->parsed()) return cmd_fetch(o, download, out, err);
    if (census_cmd->parsed()) return cmd_census(o, out, err);
    if (train_cmd->parsed()) return cmd_train(o, out, err);
    if (eval_cmd->parsed()) return cmd_eval_cv(o, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(o, out, err);
    if (base_cmd->parsed()) return cmd_baseline(o, out, err);
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace sigat::cli

#endif  // SIGAT_CLI_HPP
