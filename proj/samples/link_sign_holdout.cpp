// Trains an embedding on 80% of the edges of a signed graph and predicts the
// signs of the rest.
//
//   link_sign_holdout [edges.tsv]
//
// Without an argument a synthetic graph is used in which every node has a
// hidden reputation and incoming edges to reputable nodes are mostly positive.
#include <iostream>

#include "sigat/sigat.hpp"

namespace {

sigat::SignedDigraph reputation_graph(std::size_t n, std::size_t edges, std::uint64_t seed) {
  sigat::Rng rng(seed);
  std::vector<double> reputation(n);
  for (auto& r : reputation) r = rng.uniform01();
  std::vector<sigat::Edge> out;
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  while (out.size() < edges) {
    const auto u = static_cast<sigat::NodeId>(rng.below(n));
    const auto v = static_cast<sigat::NodeId>(rng.below(n));
    if (u == v || used[u][v]) continue;
    used[u][v] = true;
    out.push_back({u, v, rng.uniform01() < 0.15 + 0.8 * reputation[v] ? 1 : -1});
  }
  return sigat::SignedDigraph(n, std::move(out));
}

}  // namespace

int main(int argc, char** argv) {
  sigat::SignedDigraph g;
  if (argc > 1) {
    g = sigat::load_edge_list(argv[1], sigat::guess_edge_format(argv[1])).graph;
  } else {
    g = reputation_graph(300, 3000, 1);
  }
  std::cout << g.num_nodes() << " nodes, " << g.num_edges() << " edges (" << g.num_positive() << " positive)\n";

  const sigat::EdgeSplit split = sigat::make_holdout(g, 0.2, 42);
  const sigat::SignedDigraph train_graph = sigat::subgraph_from_edges(g, split.train_edges);
  const sigat::MotifNeighborhoods nb = sigat::extract(train_graph);

  sigat::SigatConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 30;
  cfg.batch_size = 100;
  cfg.lr = 0.005;
  const auto result = sigat::train(train_graph, nb, cfg, [](std::size_t epoch, double loss, const sigat::SigatModel&) {
    if (epoch % 10 == 0) std::cout << "epoch " << epoch << "  loss " << loss << '\n';
  });

  const sigat::Tensor2 z = sigat::embed_all(result.model, nb);
  const auto r = sigat::evaluate_link_sign(g, split, z, {});
  std::cout << "accuracy " << r.metrics.accuracy << "  f1 " << r.metrics.f1 << "  macro-f1 " << r.metrics.macro_f1
            << "  auc " << r.metrics.auc << '\n';
}
