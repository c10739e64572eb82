#ifndef SIGAT_MOTIF_HPP
#define SIGAT_MOTIF_HPP

#include <algorithm>
#include <array>
#include <bitset>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sigat/binary_io.hpp"
#include "sigat/graph.hpp"

namespace sigat {

inline constexpr int kNumMotifs = 38;
inline constexpr int kFirstTriangleMotif = 6;

enum class MotifKind { UndirectedSign, DirectedSign, Triangle };

/// Relation of a node pair (a, b) seen from a: an edge a->b or b->a with a sign.
enum class EdgeConfig : std::uint8_t { OutPos = 0, OutNeg = 1, InPos = 2, InNeg = 3 };

/// The same relation seen from the other endpoint.
constexpr EdgeConfig reversed(EdgeConfig c) {
  return static_cast<EdgeConfig>((static_cast<int>(c) + 2) % 4);
}

constexpr const char* to_string(EdgeConfig c) {
  constexpr const char* names[] = {"out+", "out-", "in+", "in-"};
  return names[static_cast<int>(c)];
}

/// One neighborhood relation "v influences u".
///
/// Ids 0-1: v is a positive / negative neighbor of u, either direction.
/// Ids 2-5: u->v +, u->v -, v->u +, v->u - (u's out/in adjacency).
/// Ids 6-37: triangles. id = 6 + 16*s + 4*c1 + c2 where s is the sign of the
/// u-v pair (0 = +, 1 = -, either direction), c1 the u-w relation seen from u
/// and c2 the w-v relation seen from w, both in EdgeConfig order. v is a
/// member when the u-v edge exists with that sign and at least one w
/// satisfies both relations.
struct MotifId {
  int id = 0;
  MotifKind kind = MotifKind::UndirectedSign;
  int sign = 1;                              // undirected/directed: edge sign; triangle: u-v sign
  bool outgoing = true;                      // directed-sign only
  EdgeConfig uw = EdgeConfig::OutPos;        // triangle only
  EdgeConfig wv = EdgeConfig::OutPos;        // triangle only

  std::string descriptor() const {
    const char s = sign > 0 ? '+' : '-';
    switch (kind) {
      case MotifKind::UndirectedSign:
        return std::string("undirected(") + s + ")";
      case MotifKind::DirectedSign:
        return std::string(outgoing ? "out(" : "in(") + s + ")";
      case MotifKind::Triangle:
        return std::string("triangle(uv") + s + ",uw:" + to_string(uw) + ",wv:" + to_string(wv) + ")";
    }
    return {};
  }

  friend bool operator==(const MotifId&, const MotifId&) = default;
};

constexpr int triangle_motif_id(int sign, EdgeConfig uw, EdgeConfig wv) {
  return kFirstTriangleMotif + 16 * (sign > 0 ? 0 : 1) + 4 * static_cast<int>(uw) + static_cast<int>(wv);
}

inline const std::vector<MotifId>& catalog() {
  static const std::vector<MotifId> motifs = [] {
    std::vector<MotifId> m;
    m.push_back({0, MotifKind::UndirectedSign, 1});
    m.push_back({1, MotifKind::UndirectedSign, -1});
    m.push_back({2, MotifKind::DirectedSign, 1, true});
    m.push_back({3, MotifKind::DirectedSign, -1, true});
    m.push_back({4, MotifKind::DirectedSign, 1, false});
    m.push_back({5, MotifKind::DirectedSign, -1, false});
    for (int s : {1, -1})
      for (int c1 = 0; c1 < 4; ++c1)
        for (int c2 = 0; c2 < 4; ++c2) {
          MotifId t;
          t.kind = MotifKind::Triangle;
          t.sign = s;
          t.uw = static_cast<EdgeConfig>(c1);
          t.wv = static_cast<EdgeConfig>(c2);
          t.id = triangle_motif_id(s, t.uw, t.wv);
          m.push_back(t);
        }
    return m;
  }();
  return motifs;
}

/// Ids of the two undirected signed-neighbor motifs.
inline std::vector<int> plus_minus_motifs() { return {0, 1}; }

inline std::vector<int> all_motifs() {
  std::vector<int> ids(kNumMotifs);
  for (int i = 0; i < kNumMotifs; ++i) ids[static_cast<std::size_t>(i)] = i;
  return ids;
}

/// Per-motif neighbor lists over a fixed node set, one CSR per motif.
/// Motifs not requested at extraction have empty rows.
class MotifNeighborhoods {
 public:
  MotifNeighborhoods() = default;
  MotifNeighborhoods(std::size_t num_nodes, std::array<Csr, kNumMotifs> per_motif, std::bitset<kNumMotifs> present)
      : num_nodes_(num_nodes), per_motif_(std::move(per_motif)), present_(present) {}

  std::size_t num_nodes() const { return num_nodes_; }
  std::span<const NodeId> neighbors(int motif, NodeId u) const {
    return per_motif_[static_cast<std::size_t>(motif)].row(u);
  }
  const Csr& graph(int motif) const { return per_motif_[static_cast<std::size_t>(motif)]; }
  bool has(int motif) const { return present_.test(static_cast<std::size_t>(motif)); }
  const std::bitset<kNumMotifs>& present() const { return present_; }

  friend bool operator==(const MotifNeighborhoods&, const MotifNeighborhoods&) = default;

 private:
  std::size_t num_nodes_ = 0;
  std::array<Csr, kNumMotifs> per_motif_{};
  std::bitset<kNumMotifs> present_{};
};

namespace detail {

/// Sorted (neighbor, relation mask) list per node. Bit c of the mask is set
/// when relation EdgeConfig(c) holds from the row node to the neighbor.
struct RelationAdjacency {
  std::vector<std::size_t> offsets;
  std::vector<NodeId> nodes;
  std::vector<std::uint8_t> masks;

  explicit RelationAdjacency(const SignedDigraph& g) {
    const std::size_t n = g.num_nodes();
    offsets.assign(n + 1, 0);
    std::vector<std::pair<NodeId, std::uint8_t>> row;
    for (NodeId u = 0; u < n; ++u) {
      row.clear();
      auto add = [&](std::span<const NodeId> list, EdgeConfig c) {
        for (NodeId v : list) row.emplace_back(v, static_cast<std::uint8_t>(1u << static_cast<int>(c)));
      };
      add(g.out_pos(u), EdgeConfig::OutPos);
      add(g.out_neg(u), EdgeConfig::OutNeg);
      add(g.in_pos(u), EdgeConfig::InPos);
      add(g.in_neg(u), EdgeConfig::InNeg);
      std::ranges::sort(row, {}, &std::pair<NodeId, std::uint8_t>::first);
      for (std::size_t i = 0; i < row.size();) {
        std::uint8_t m = 0;
        const NodeId v = row[i].first;
        for (; i < row.size() && row[i].first == v; ++i) m |= row[i].second;
        nodes.push_back(v);
        masks.push_back(m);
      }
      offsets[u + 1] = nodes.size();
    }
  }

  std::size_t begin(NodeId u) const { return offsets[u]; }
  std::size_t end(NodeId u) const { return offsets[u + 1]; }
  std::size_t degree(NodeId u) const { return offsets[u + 1] - offsets[u]; }
};

constexpr std::uint8_t kPosMask = (1u << 0) | (1u << 2);
constexpr std::uint8_t kNegMask = (1u << 1) | (1u << 3);

/// Relation mask seen from the other endpoint: swaps out/in bits.
constexpr std::uint8_t reverse_mask(std::uint8_t m) {
  return static_cast<std::uint8_t>(((m & 0x3) << 2) | ((m >> 2) & 0x3));
}

/// Marks found[4*c1 + c2] for every common neighbor w of (u, v), where c1 is
/// a relation u->w and c2 a relation w->v. Iterates the shorter list and
/// binary-searches the longer one when their lengths are lopsided.
inline void scan_common(const RelationAdjacency& adj, NodeId u, NodeId v, std::array<bool, 16>& found) {
  auto mark = [&](std::uint8_t mu, std::uint8_t mv_from_v) {
    const std::uint8_t mw = reverse_mask(mv_from_v);  // relations w->v seen from w
    for (int c1 = 0; c1 < 4; ++c1)
      if (mu & (1u << c1))
        for (int c2 = 0; c2 < 4; ++c2)
          if (mw & (1u << c2)) found[static_cast<std::size_t>(4 * c1 + c2)] = true;
  };
  std::size_t i = adj.begin(u), ie = adj.end(u);
  std::size_t j = adj.begin(v), je = adj.end(v);
  const std::size_t du = ie - i, dv = je - j;
  if (du * 8 < dv || dv * 8 < du) {
    const bool u_short = du <= dv;
    std::size_t s = u_short ? i : j, se = u_short ? ie : je;
    std::size_t l = u_short ? j : i, le = u_short ? je : ie;
    for (; s < se; ++s) {
      const NodeId w = adj.nodes[s];
      auto it = std::lower_bound(adj.nodes.begin() + static_cast<std::ptrdiff_t>(l),
                                 adj.nodes.begin() + static_cast<std::ptrdiff_t>(le), w);
      l = static_cast<std::size_t>(it - adj.nodes.begin());
      if (l == le) break;
      if (adj.nodes[l] == w) {
        if (u_short) mark(adj.masks[s], adj.masks[l]);
        else mark(adj.masks[l], adj.masks[s]);
      }
    }
    return;
  }
  while (i < ie && j < je) {
    if (adj.nodes[i] < adj.nodes[j]) ++i;
    else if (adj.nodes[j] < adj.nodes[i]) ++j;
    else {
      mark(adj.masks[i], adj.masks[j]);
      ++i, ++j;
    }
  }
}

}  // namespace detail

/// Materializes N_m(u) for every requested motif.
///
/// Signed/directed motifs copy the adjacency lists. Triangle motifs visit each
/// adjacent unordered pair {u, v} once and intersect the two relation lists,
/// costing O(sum over adjacent pairs of min(deg u, deg v) * log) when degrees
/// are lopsided and O(deg u + deg v) otherwise. Each pair result fills both
/// orientations: (s, c1, c2) for u sees v, (s, rev c2, rev c1) for v sees u.
inline MotifNeighborhoods extract(const SignedDigraph& g, std::span<const int> motifs) {
  const std::size_t n = g.num_nodes();
  std::bitset<kNumMotifs> want;
  for (int m : motifs) {
    if (m < 0 || m >= kNumMotifs) throw std::invalid_argument("extract: motif id out of range");
    want.set(static_cast<std::size_t>(m));
  }
  std::array<Csr, kNumMotifs> out{};
  std::array<std::vector<std::pair<NodeId, NodeId>>, kNumMotifs> pairs{};

  const detail::RelationAdjacency adj(g);
  bool any_triangle = false;
  for (int m = kFirstTriangleMotif; m < kNumMotifs; ++m) any_triangle |= want.test(static_cast<std::size_t>(m));

  for (NodeId u = 0; u < n; ++u) {
    for (std::size_t k = adj.begin(u); k < adj.end(u); ++k) {
      const NodeId v = adj.nodes[k];
      const std::uint8_t m = adj.masks[k];
      if (m & detail::kPosMask) pairs[0].emplace_back(u, v);
      if (m & detail::kNegMask) pairs[1].emplace_back(u, v);
      if (!any_triangle || v < u) continue;

      std::array<bool, 16> found{};
      detail::scan_common(adj, u, v, found);
      for (int sidx = 0; sidx < 2; ++sidx) {
        const std::uint8_t sign_mask = sidx == 0 ? detail::kPosMask : detail::kNegMask;
        if (!(m & sign_mask)) continue;
        const int sign = sidx == 0 ? 1 : -1;
        for (int c1 = 0; c1 < 4; ++c1)
          for (int c2 = 0; c2 < 4; ++c2) {
            if (!found[static_cast<std::size_t>(4 * c1 + c2)]) continue;
            const auto e1 = static_cast<EdgeConfig>(c1), e2 = static_cast<EdgeConfig>(c2);
            const int fwd = triangle_motif_id(sign, e1, e2);
            const int bwd = triangle_motif_id(sign, reversed(e2), reversed(e1));
            if (want.test(static_cast<std::size_t>(fwd))) pairs[static_cast<std::size_t>(fwd)].emplace_back(u, v);
            if (want.test(static_cast<std::size_t>(bwd))) pairs[static_cast<std::size_t>(bwd)].emplace_back(v, u);
          }
      }
    }
  }

  auto copy_adjacency = [&](int id, auto getter) {
    std::vector<std::pair<NodeId, NodeId>> p;
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v : getter(u)) p.emplace_back(u, v);
    out[static_cast<std::size_t>(id)] = Csr::from_pairs(n, std::move(p));
  };
  for (int id = 0; id < kNumMotifs; ++id) {
    if (!want.test(static_cast<std::size_t>(id))) {
      out[static_cast<std::size_t>(id)] = Csr::from_pairs(n, {});
      continue;
    }
    switch (id) {
      case 2: copy_adjacency(id, [&](NodeId u) { return g.out_pos(u); }); break;
      case 3: copy_adjacency(id, [&](NodeId u) { return g.out_neg(u); }); break;
      case 4: copy_adjacency(id, [&](NodeId u) { return g.in_pos(u); }); break;
      case 5: copy_adjacency(id, [&](NodeId u) { return g.in_neg(u); }); break;
      default: out[static_cast<std::size_t>(id)] = Csr::from_pairs(n, std::move(pairs[static_cast<std::size_t>(id)]));
    }
  }
  return MotifNeighborhoods(n, std::move(out), want);
}

inline MotifNeighborhoods extract(const SignedDigraph& g) {
  const auto ids = all_motifs();
  return extract(g, ids);
}

/// count[m] = sum over u of |N_m(u)|.
inline std::array<std::size_t, kNumMotifs> census(const MotifNeighborhoods& n) {
  std::array<std::size_t, kNumMotifs> c{};
  for (int m = 0; m < kNumMotifs; ++m) c[static_cast<std::size_t>(m)] = n.graph(m).size();
  return c;
}

// ---------------------------------------------------------------------------
// Binary cache
//
//   "SGMN" | u32 version=1 | u64 graph content hash | u64 num_nodes | u32 count
//   count x { u32 motif id | u64 num_neighbors | (num_nodes+1) x u64 offsets
//             | num_neighbors x u32 neighbors }
// All integers little-endian.

inline constexpr std::uint32_t kMotifCacheVersion = 1;

inline void write_motif_cache(std::ostream& os, const MotifNeighborhoods& n, std::uint64_t graph_hash) {
  binio::put_magic(os, "SGMN");
  binio::put_u32(os, kMotifCacheVersion);
  binio::put_u64(os, graph_hash);
  binio::put_u64(os, n.num_nodes());
  binio::put_u32(os, static_cast<std::uint32_t>(n.present().count()));
  for (int m = 0; m < kNumMotifs; ++m) {
    if (!n.has(m)) continue;
    const Csr& c = n.graph(m);
    binio::put_u32(os, static_cast<std::uint32_t>(m));
    binio::put_u64(os, c.targets.size());
    for (std::size_t o : c.offsets) binio::put_u64(os, o);
    for (NodeId v : c.targets) binio::put_u32(os, v);
  }
}

/// Throws DataError on format problems or when the cache was built for a
/// different graph.
inline MotifNeighborhoods read_motif_cache(std::istream& is, std::uint64_t expected_graph_hash) {
  binio::expect_magic(is, "SGMN");
  if (binio::get_u32(is) != kMotifCacheVersion) throw DataError("motif cache: unsupported version");
  if (binio::get_u64(is) != expected_graph_hash) throw DataError("motif cache: graph hash mismatch");
  const auto n = binio::get_u64(is);
  const auto count = binio::get_u32(is);
  std::array<Csr, kNumMotifs> per{};
  std::bitset<kNumMotifs> present;
  for (auto& c : per) c.offsets.assign(n + 1, 0);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto m = binio::get_u32(is);
    if (m >= kNumMotifs || present.test(m)) throw DataError("motif cache: bad motif id");
    present.set(m);
    Csr& c = per[m];
    const auto nnz = binio::get_u64(is);
    if (n > 0 && nnz / n > n) throw DataError("motif cache: neighbor count too large");
    c.targets.resize(nnz);
    for (auto& o : c.offsets) o = binio::get_u64(is);
    for (auto& v : c.targets) {
      v = binio::get_u32(is);
      if (v >= n) throw DataError("motif cache: neighbor out of range");
    }
    if (c.offsets.front() != 0 || c.offsets.back() != c.targets.size() ||
        !std::ranges::is_sorted(c.offsets))
      throw DataError("motif cache: inconsistent offsets");
  }
  return MotifNeighborhoods(n, std::move(per), present);
}

}  // namespace sigat

#endif  // SIGAT_MOTIF_HPP
