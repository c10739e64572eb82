#ifndef SIGAT_GRAPH_HPP
#define SIGAT_GRAPH_HPP

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigat/common.hpp"

namespace sigat {

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  int sign = 1;  // +1 or -1

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Compressed adjacency: offsets into a flat neighbor array.
struct Csr {
  std::vector<std::size_t> offsets;  // num_nodes + 1
  std::vector<NodeId> targets;

  std::span<const NodeId> row(NodeId u) const {
    return {targets.data() + offsets[u], offsets[u + 1] - offsets[u]};
  }
  std::size_t size() const { return targets.size(); }

  /// Builds sorted rows from unsorted (row, target) pairs. Duplicates are kept.
  static Csr from_pairs(std::size_t num_rows, std::vector<std::pair<NodeId, NodeId>> pairs) {
    Csr c;
    c.offsets.assign(num_rows + 1, 0);
    for (const auto& [r, t] : pairs) ++c.offsets[r + 1];
    std::partial_sum(c.offsets.begin(), c.offsets.end(), c.offsets.begin());
    c.targets.resize(pairs.size());
    std::vector<std::size_t> cursor(c.offsets.begin(), c.offsets.end() - 1);
    for (const auto& [r, t] : pairs) c.targets[cursor[r]++] = t;
    for (std::size_t r = 0; r < num_rows; ++r)
      std::sort(c.targets.begin() + static_cast<std::ptrdiff_t>(c.offsets[r]),
                c.targets.begin() + static_cast<std::ptrdiff_t>(c.offsets[r + 1]));
    return c;
  }

  friend bool operator==(const Csr&, const Csr&) = default;
};

/// Node-indexed signed directed edge store. Immutable after construction.
///
/// Node ids are dense in [0, num_nodes). Self-loops and repeated ordered
/// pairs are rejected; loaders filter them before construction. The pair
/// (u->v, v->u) is two distinct edges and may carry different signs.
class SignedDigraph {
 public:
  SignedDigraph() : SignedDigraph(0, {}) {}

  SignedDigraph(std::size_t num_nodes, std::vector<Edge> edges)
      : num_nodes_(num_nodes), edges_(std::move(edges)) {
    std::vector<std::pair<NodeId, NodeId>> op, on, ip, in;
    for (const Edge& e : edges_) {
      if (e.src >= num_nodes_ || e.dst >= num_nodes_)
        throw DataError("edge endpoint out of range: " + std::to_string(e.src) + "->" +
                        std::to_string(e.dst));
      if (e.src == e.dst) throw DataError("self-loop on node " + std::to_string(e.src));
      if (e.sign != 1 && e.sign != -1) throw DataError("edge sign must be +1 or -1");
      if (e.sign > 0) {
        op.emplace_back(e.src, e.dst);
        ip.emplace_back(e.dst, e.src);
        ++num_positive_;
      } else {
        on.emplace_back(e.src, e.dst);
        in.emplace_back(e.dst, e.src);
      }
    }
    out_pos_ = Csr::from_pairs(num_nodes_, std::move(op));
    out_neg_ = Csr::from_pairs(num_nodes_, std::move(on));
    in_pos_ = Csr::from_pairs(num_nodes_, std::move(ip));
    in_neg_ = Csr::from_pairs(num_nodes_, std::move(in));
    for (NodeId u = 0; u < num_nodes_; ++u) {
      auto a = out_pos_.row(u), b = out_neg_.row(u);
      for (std::size_t i = 1; i < a.size(); ++i)
        if (a[i] == a[i - 1]) throw DataError("duplicate edge " + std::to_string(u) + "->" + std::to_string(a[i]));
      for (std::size_t i = 1; i < b.size(); ++i)
        if (b[i] == b[i - 1]) throw DataError("duplicate edge " + std::to_string(u) + "->" + std::to_string(b[i]));
      std::vector<NodeId> both;
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
      if (!both.empty())
        throw DataError("edge " + std::to_string(u) + "->" + std::to_string(both.front()) +
                        " stored with both signs");
    }
  }

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_positive() const { return num_positive_; }
  std::size_t num_negative() const { return edges_.size() - num_positive_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeIndex i) const { return edges_.at(i); }

  std::span<const NodeId> out_pos(NodeId u) const { return out_pos_.row(u); }
  std::span<const NodeId> out_neg(NodeId u) const { return out_neg_.row(u); }
  std::span<const NodeId> in_pos(NodeId u) const { return in_pos_.row(u); }
  std::span<const NodeId> in_neg(NodeId u) const { return in_neg_.row(u); }

  /// Sign of the stored edge u->v, if any.
  std::optional<int> sign_of(NodeId u, NodeId v) const {
    if (std::ranges::binary_search(out_pos(u), v)) return 1;
    if (std::ranges::binary_search(out_neg(u), v)) return -1;
    return std::nullopt;
  }

  /// Content hash over node count and the ordered edge list.
  std::uint64_t content_hash() const {
    Fnv1a h;
    h.update_u64(num_nodes_);
    h.update_u64(edges_.size());
    for (const Edge& e : edges_) {
      h.update_u64(e.src);
      h.update_u64(e.dst);
      h.update_u64(e.sign > 0 ? 1 : 0);
    }
    return h.digest();
  }

  friend bool operator==(const SignedDigraph& a, const SignedDigraph& b) {
    return a.num_nodes_ == b.num_nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t num_nodes_ = 0;
  std::size_t num_positive_ = 0;
  std::vector<Edge> edges_;
  Csr out_pos_, out_neg_, in_pos_, in_neg_;
};

// ---------------------------------------------------------------------------
// Loading

enum class EdgeFormat { SnapTsv, WeightedCsv };

inline std::optional<EdgeFormat> parse_edge_format(std::string_view s) {
  if (s == "snap-tsv") return EdgeFormat::SnapTsv;
  if (s == "weighted-csv") return EdgeFormat::WeightedCsv;
  return std::nullopt;
}

inline const char* to_string(EdgeFormat f) {
  return f == EdgeFormat::SnapTsv ? "snap-tsv" : "weighted-csv";
}

/// Picks a format from the file name: *.csv / *.csv.gz are weighted-csv.
inline EdgeFormat guess_edge_format(const std::filesystem::path& p) {
  std::string name = p.filename().string();
  if (name.ends_with(".gz")) name.resize(name.size() - 3);
  return name.ends_with(".csv") ? EdgeFormat::WeightedCsv : EdgeFormat::SnapTsv;
}

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what, const std::string& source = {})
      : DataError((source.empty() ? "" : source + ":") + "line " + std::to_string(line) + ": " + what),
        line_(line),
        detail_(what) {}
  const std::string& detail() const { return detail_; }
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
  std::string detail_;
};

struct LoadStats {
  std::size_t lines = 0;
  std::size_t self_loops = 0;
  std::size_t duplicates = 0;
  bool header_skipped = false;
};

struct LoadedGraph {
  SignedDigraph graph;
  LoadStats stats;
  std::vector<std::int64_t> original_ids;  // dense id -> id in file
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<std::string_view> split_char(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace detail

/// Parses an edge list. Node ids are remapped densely in order of first
/// appearance (src before dst on each line). Self-loops are dropped before
/// remapping; repeated ordered pairs keep their first occurrence.
inline LoadedGraph read_edge_list(std::istream& in, EdgeFormat format) {
  LoadedGraph out;
  std::unordered_map<std::int64_t, NodeId> remap;
  std::unordered_map<std::uint64_t, char> seen;
  std::vector<Edge> edges;
  auto id_of = [&](std::int64_t raw) {
    auto [it, inserted] = remap.try_emplace(raw, static_cast<NodeId>(remap.size()));
    if (inserted) out.original_ids.push_back(raw);
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = detail::trim(line);
    if (s.empty() || s.front() == '#') continue;
    ++out.stats.lines;

    std::int64_t src = 0, dst = 0;
    int sign = 0;
    if (format == EdgeFormat::SnapTsv) {
      auto f = detail::split_ws(s);
      if (f.size() != 3) throw ParseError(lineno, "expected 3 fields, got " + std::to_string(f.size()));
      auto a = detail::parse_int(f[0]), b = detail::parse_int(f[1]), c = detail::parse_int(f[2]);
      if (!a || !b || !c) throw ParseError(lineno, "non-integer field");
      if (*c != 1 && *c != -1) throw ParseError(lineno, "sign must be 1 or -1, got " + std::string(f[2]));
      src = *a, dst = *b, sign = static_cast<int>(*c);
    } else {
      auto f = detail::split_char(s, ',');
      if (f.size() != 3 && f.size() != 4) {
        throw ParseError(lineno, "expected SOURCE,TARGET,RATING[,TIME]");
      }
      auto a = detail::parse_int(f[0]), b = detail::parse_int(f[1]), c = detail::parse_int(f[2]);
      if (!a || !b || !c) {
        if (first_content) {
          first_content = false;
          out.stats.header_skipped = true;
          --out.stats.lines;
          continue;
        }
        throw ParseError(lineno, "non-integer field");
      }
      src = *a, dst = *b;
      sign = *c > 0 ? 1 : -1;
    }
    first_content = false;

    if (src == dst) {
      ++out.stats.self_loops;
      continue;
    }
    const NodeId u = id_of(src), v = id_of(dst);
    const std::uint64_t key = (static_cast<std::uint64_t>(u) << 32) | v;
    if (!seen.emplace(key, 1).second) {
      ++out.stats.duplicates;
      continue;
    }
    edges.push_back({u, v, sign});
  }
  out.graph = SignedDigraph(remap.size(), std::move(edges));
  return out;
}

/// Reads a whole file; gzip-compressed files are inflated transparently.
inline std::string read_file_bytes(const std::filesystem::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (!f) throw DataError("cannot open " + path.string());
  std::string data;
  char buf[1 << 16];
  int n;
  while ((n = gzread(f, buf, sizeof buf)) > 0) data.append(buf, static_cast<std::size_t>(n));
  const bool failed = n < 0;
  gzclose(f);
  if (failed) throw DataError("read error in " + path.string());
  return data;
}

inline LoadedGraph load_edge_list(const std::filesystem::path& path, EdgeFormat format) {
  if (!std::filesystem::is_regular_file(path)) throw DataError("no such file: " + path.string());
  std::istringstream in(read_file_bytes(path));
  try {
    return read_edge_list(in, format);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path.string());
  }
}

/// Writes snap-tsv using the graph's dense ids. Reloading relabels ids by
/// first appearance, so compare edge multisets through `original_ids`.
inline void write_snap_tsv(const SignedDigraph& g, std::ostream& os) {
  for (const Edge& e : g.edges()) os << e.src << '\t' << e.dst << '\t' << e.sign << '\n';
}

// ---------------------------------------------------------------------------
// Splits

struct EdgeSplit {
  std::vector<EdgeIndex> train_edges;
  std::vector<EdgeIndex> test_edges;
  int fold_id = 0;
  std::uint64_t seed = 0;
};

/// Shuffles edge indices with `seed` and cuts them into k contiguous folds
/// whose sizes differ by at most one. Split i tests on fold i.
inline std::vector<EdgeSplit> make_folds(const SignedDigraph& g, std::size_t k, std::uint64_t seed) {
  const std::size_t n = g.num_edges();
  if (k < 2) throw std::invalid_argument("make_folds: k must be >= 2");
  if (k > n) throw std::invalid_argument("make_folds: k=" + std::to_string(k) + " exceeds edge count " + std::to_string(n));
  std::vector<EdgeIndex> perm(n);
  std::iota(perm.begin(), perm.end(), EdgeIndex{0});
  Rng rng(seed);
  rng.shuffle(perm);

  std::vector<int> fold_of(n);
  for (std::size_t f = 0; f < k; ++f)
    for (std::size_t i = f * n / k; i < (f + 1) * n / k; ++i) fold_of[perm[i]] = static_cast<int>(f);

  std::vector<EdgeSplit> splits(k);
  for (std::size_t f = 0; f < k; ++f) {
    splits[f].fold_id = static_cast<int>(f);
    splits[f].seed = seed;
  }
  for (EdgeIndex e = 0; e < n; ++e)
    for (std::size_t f = 0; f < k; ++f)
      (fold_of[e] == static_cast<int>(f) ? splits[f].test_edges : splits[f].train_edges).push_back(e);
  return splits;
}

/// Random holdout: `test_fraction` of edges (rounded down) go to test.
inline EdgeSplit make_holdout(const SignedDigraph& g, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("make_holdout: test_fraction must be in (0,1)");
  const std::size_t n = g.num_edges();
  std::vector<EdgeIndex> perm(n);
  std::iota(perm.begin(), perm.end(), EdgeIndex{0});
  Rng rng(seed);
  rng.shuffle(perm);
  const auto n_test = static_cast<std::size_t>(static_cast<double>(n) * test_fraction);
  EdgeSplit s;
  s.seed = seed;
  s.test_edges.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train_edges.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::ranges::sort(s.test_edges);
  std::ranges::sort(s.train_edges);
  return s;
}

/// Same node-id space, only the kept edges.
inline SignedDigraph subgraph_from_edges(const SignedDigraph& g, std::span<const EdgeIndex> keep) {
  std::vector<Edge> edges;
  edges.reserve(keep.size());
  for (EdgeIndex i : keep) {
    if (i >= g.num_edges()) throw std::out_of_range("subgraph_from_edges: edge index " + std::to_string(i));
    edges.push_back(g.edges()[i]);
  }
  return SignedDigraph(g.num_nodes(), std::move(edges));
}

/// Split manifest: {"seed": s, "k": k, "folds": [[test edge indices]...]}.
inline nlohmann::json split_manifest(const std::vector<EdgeSplit>& splits, std::uint64_t seed) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& s : splits) folds.push_back(s.test_edges);
  return {{"seed", seed}, {"k", splits.size()}, {"folds", folds}};
}

inline std::vector<EdgeSplit> splits_from_manifest(const nlohmann::json& j, std::size_t num_edges) try {
  const auto k = j.at("k").get<std::size_t>();
  const auto seed = j.at("seed").get<std::uint64_t>();
  const auto& folds = j.at("folds");
  if (folds.size() != k) throw DataError("split manifest: k does not match fold count");
  std::vector<int> fold_of(num_edges, -1);
  for (std::size_t f = 0; f < k; ++f) {
    for (const auto& v : folds[f]) {
      const auto e = v.get<EdgeIndex>();
      if (e >= num_edges || fold_of[e] != -1) throw DataError("split manifest: bad or repeated edge index");
      fold_of[e] = static_cast<int>(f);
    }
  }
  std::vector<EdgeSplit> splits(k);
  for (std::size_t f = 0; f < k; ++f) {
    splits[f].fold_id = static_cast<int>(f);
    splits[f].seed = seed;
  }
  for (EdgeIndex e = 0; e < num_edges; ++e) {
    if (fold_of[e] < 0) throw DataError("split manifest: edge " + std::to_string(e) + " not assigned");
    for (std::size_t f = 0; f < k; ++f)
      (fold_of[e] == static_cast<int>(f) ? splits[f].test_edges : splits[f].train_edges).push_back(e);
  }
  return splits;
} catch (const nlohmann::json::exception& e) {
  throw DataError(std::string("split manifest: ") + e.what());
}

}  // namespace sigat

#endif  // SIGAT_GRAPH_HPP
