#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "autossl/error.hpp"
#include "autossl/numeric.hpp"
#include "autossl/rng.hpp"

namespace autossl {

using NodeId = std::int64_t;
using LabelVector = std::vector<int>;

// Undirected edge with u < v.
struct Edge {
  NodeId u;
  NodeId v;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// What happened to the raw edge list while building a Graph.
struct EdgeReport {
  std::int64_t input_edges = 0;
  std::int64_t self_loops = 0;
  // Repeats of an already-seen unordered pair, including the reverse direction.
  std::int64_t duplicates = 0;
  // Inputs whose reverse direction was also present (a sign the file lists both directions).
  std::int64_t reciprocal_pairs = 0;
};

inline CsrMatrix build_normalized_adjacency(NodeId n, std::span<const Edge> edges,
                                            std::span<const NodeId> degree);

// Immutable undirected graph with node features and optional labels.
//
// Edges are kept once per unordered pair (for counting) and in both directions
// inside the CSR neighbor arrays (for propagation).
class Graph {
 public:
  Graph() = default;

  Graph(NodeId num_nodes, std::vector<std::pair<NodeId, NodeId>> raw_edges, DenseMatrix features,
        std::optional<LabelVector> labels = std::nullopt, EdgeReport* report = nullptr)
      : num_nodes_(num_nodes), features_(std::move(features)), labels_(std::move(labels)) {
    if (num_nodes_ < 0) throw ConfigError("graph: negative node count");
    if (features_.rows() != num_nodes_) {
      throw DimensionError("graph: feature matrix has " + std::to_string(features_.rows()) +
                           " rows but the graph has " + std::to_string(num_nodes_) + " nodes");
    }
    if (!features_.allFinite()) throw NumericError("graph: non-finite feature value");
    if (labels_) {
      if (static_cast<NodeId>(labels_->size()) != num_nodes_) {
        throw DimensionError("graph: " + std::to_string(labels_->size()) + " labels for " +
                             std::to_string(num_nodes_) + " nodes");
      }
      int max_label = -1;
      for (int y : *labels_) {
        if (y < 0) throw MalformedInputError("graph: negative class label");
        max_label = std::max(max_label, y);
      }
      num_classes_ = max_label + 1;
    }

    EdgeReport local;
    local.input_edges = static_cast<std::int64_t>(raw_edges.size());
    std::vector<std::pair<NodeId, NodeId>> directed;
    directed.reserve(raw_edges.size());
    for (auto [a, b] : raw_edges) {
      if (a < 0 || b < 0 || a >= num_nodes_ || b >= num_nodes_) {
        throw MalformedInputError("graph: edge (" + std::to_string(a) + "," + std::to_string(b) +
                                  ") out of range for " + std::to_string(num_nodes_) + " nodes");
      }
      if (a == b) {
        ++local.self_loops;
        continue;
      }
      directed.emplace_back(a, b);
    }
    {
      auto sorted = directed;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      for (auto [a, b] : sorted) {
        if (a < b && std::binary_search(sorted.begin(), sorted.end(), std::make_pair(b, a))) {
          local.reciprocal_pairs += 2;
        }
      }
    }
    edges_.reserve(directed.size());
    for (auto [a, b] : directed) edges_.push_back(Edge{std::min(a, b), std::max(a, b)});
    std::sort(edges_.begin(), edges_.end());
    const auto last = std::unique(edges_.begin(), edges_.end());
    local.duplicates = static_cast<std::int64_t>(std::distance(last, edges_.end()));
    edges_.erase(last, edges_.end());

    degree_.assign(static_cast<std::size_t>(num_nodes_), 0);
    for (const Edge& e : edges_) {
      ++degree_[e.u];
      ++degree_[e.v];
    }
    offsets_.assign(static_cast<std::size_t>(num_nodes_) + 1, 0);
    for (NodeId v = 0; v < num_nodes_; ++v) offsets_[v + 1] = offsets_[v] + degree_[v];
    neighbors_.resize(static_cast<std::size_t>(offsets_.back()));
    std::vector<NodeId> fill(offsets_.begin(), offsets_.end() - 1);
    for (const Edge& e : edges_) {
      neighbors_[fill[e.u]++] = e.v;
      neighbors_[fill[e.v]++] = e.u;
    }
    for (NodeId v = 0; v < num_nodes_; ++v) {
      std::sort(neighbors_.begin() + offsets_[v], neighbors_.begin() + offsets_[v + 1]);
    }
    max_degree_ = degree_.empty() ? 0 : *std::max_element(degree_.begin(), degree_.end());
    norm_adj_ = build_normalized_adjacency(num_nodes_, edges_, degree_);
    if (report) *report = local;
  }

  NodeId num_nodes() const { return num_nodes_; }
  std::int64_t num_edges() const { return static_cast<std::int64_t>(edges_.size()); }
  std::span<const Edge> edges() const { return edges_; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {neighbors_.data() + offsets_[v], static_cast<std::size_t>(degree_[v])};
  }
  NodeId degree(NodeId v) const { return degree_[v]; }
  NodeId max_degree() const { return max_degree_; }

  const DenseMatrix& features() const { return features_; }
  Index feature_dim() const { return features_.cols(); }

  bool has_labels() const { return labels_.has_value(); }
  const LabelVector& labels() const {
    if (!labels_) throw UndefinedError("graph has no labels");
    return *labels_;
  }
  int num_classes() const { return num_classes_; }

  // D^-1/2 (A + I) D^-1/2, computed once at construction.
  const CsrMatrix& normalized_adjacency() const { return norm_adj_; }

  bool has_edge(NodeId u, NodeId v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

 private:
  NodeId num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<NodeId> degree_;
  std::vector<NodeId> offsets_{0};
  std::vector<NodeId> neighbors_;
  NodeId max_degree_ = 0;
  DenseMatrix features_;
  std::optional<LabelVector> labels_;
  int num_classes_ = 0;
  CsrMatrix norm_adj_;
};

inline CsrMatrix build_normalized_adjacency(NodeId n, std::span<const Edge> edges,
                                            std::span<const NodeId> degree) {
  std::vector<Eigen::Triplet<double, std::int64_t>> trips;
  trips.reserve(2 * edges.size() + static_cast<std::size_t>(n));
  std::vector<double> inv_sqrt(static_cast<std::size_t>(n));
  for (NodeId v = 0; v < n; ++v) inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(degree[v] + 1));
  for (NodeId v = 0; v < n; ++v) trips.emplace_back(v, v, inv_sqrt[v] * inv_sqrt[v]);
  for (const Edge& e : edges) {
    const double w = inv_sqrt[e.u] * inv_sqrt[e.v];
    trips.emplace_back(e.u, e.v, w);
    trips.emplace_back(e.v, e.u, w);
  }
  CsrMatrix a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  return a;
}

// GCN propagation operator D~^-1/2 (A + I) D~^-1/2.
inline CsrMatrix normalized_adjacency(const Graph& graph) { return graph.normalized_adjacency(); }

// Fraction of undirected edges whose endpoints share a label.
inline double homophily(const Graph& graph, std::span<const int> labels) {
  if (static_cast<NodeId>(labels.size()) != graph.num_nodes()) {
    throw DimensionError("homophily: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(graph.num_nodes()) + " nodes");
  }
  if (graph.num_edges() == 0) throw UndefinedError("homophily: graph has no edges");
  std::int64_t same = 0;
  for (const Edge& e : graph.edges()) same += labels[e.u] == labels[e.v] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(graph.num_edges());
}

// Hop distances from `source`; nodes farther than `cap` (or unreachable) get cap + 1.
inline std::vector<int> bfs_distances(const Graph& graph, NodeId source, int cap) {
  if (source < 0 || source >= graph.num_nodes()) throw DomainError("bfs_distances: source out of range");
  if (cap < 1) throw DomainError("bfs_distances: cap must be >= 1");
  std::vector<int> dist(static_cast<std::size_t>(graph.num_nodes()), cap + 1);
  dist[source] = 0;
  std::queue<NodeId> frontier;
  frontier.push(source);
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop();
    if (dist[u] >= cap) continue;
    for (NodeId w : graph.neighbors(u)) {
      if (dist[w] > dist[u] + 1) {
        dist[w] = dist[u] + 1;
        frontier.push(w);
      }
    }
  }
  return dist;
}

struct SbmSpec {
  std::vector<NodeId> block_sizes;
  double p_in = 0.1;
  double p_out = 0.01;
  double feature_noise = 1.0;
};

// Stochastic block model. Features are the one-hot block indicator plus
// N(0, feature_noise^2) noise; labels are the block ids.
inline Graph sbm_generate(const SbmSpec& spec, std::uint64_t seed, std::vector<std::string>* warnings = nullptr) {
  if (spec.block_sizes.size() < 2) throw ConfigError("sbm_generate: need at least 2 blocks");
  for (double p : {spec.p_in, spec.p_out}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("sbm_generate: probabilities must lie in [0,1]");
  }
  if (!(spec.feature_noise >= 0.0)) throw ConfigError("sbm_generate: feature_noise must be >= 0");
  LabelVector labels;
  for (std::size_t b = 0; b < spec.block_sizes.size(); ++b) {
    if (spec.block_sizes[b] < 1) throw ConfigError("sbm_generate: block sizes must be >= 1");
    labels.insert(labels.end(), static_cast<std::size_t>(spec.block_sizes[b]), static_cast<int>(b));
  }
  const NodeId n = static_cast<NodeId>(labels.size());
  RngStream rng(seed);
  RngStream edge_rng = rng.derive("edges");
  RngStream feat_rng = rng.derive("features");

  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      const double p = labels[u] == labels[v] ? spec.p_in : spec.p_out;
      if (edge_rng.bernoulli(p)) edges.emplace_back(u, v);
    }
  }
  if (edges.empty() && warnings) warnings->push_back("sbm_generate: sampled graph has no edges");

  const Index blocks = static_cast<Index>(spec.block_sizes.size());
  DenseMatrix features(n, blocks);
  for (NodeId v = 0; v < n; ++v) {
    for (Index c = 0; c < blocks; ++c) {
      features(v, c) = (labels[v] == c ? 1.0 : 0.0) + spec.feature_noise * feat_rng.normal();
    }
  }
  return Graph(n, std::move(edges), std::move(features), std::move(labels));
}

}  // namespace autossl
