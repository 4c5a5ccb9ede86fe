#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "autossl/cluster.hpp"
#include "autossl/encoder.hpp"
#include "autossl/graph.hpp"
#include "autossl/numeric.hpp"
#include "autossl/rng.hpp"

namespace autossl {

using NodePair = std::pair<NodeId, NodeId>;

// ---------------------------------------------------------------------------
// Pseudo-target preparation
// ---------------------------------------------------------------------------

// Balanced partition by greedy BFS growth. Part p receives floor(N/P) nodes,
// plus one for the first N mod P parts. When a BFS frontier runs dry (the
// component is exhausted) growth restarts from a random unassigned node.
inline LabelVector prepare_clu(const Graph& graph, NodeId num_parts, std::uint64_t seed) {
  const NodeId n = graph.num_nodes();
  if (num_parts < 2) throw ConfigError("Clu: num_parts must be >= 2");
  if (num_parts > n) {
    throw ConfigError("Clu: num_parts=" + std::to_string(num_parts) + " exceeds node count " + std::to_string(n));
  }
  RngStream rng(seed);
  LabelVector part(static_cast<std::size_t>(n), -1);
  std::vector<NodeId> unassigned(static_cast<std::size_t>(n));
  std::iota(unassigned.begin(), unassigned.end(), NodeId{0});
  std::vector<NodeId> slot(static_cast<std::size_t>(n));
  std::iota(slot.begin(), slot.end(), NodeId{0});
  auto take = [&](NodeId v, int p) {
    part[v] = p;
    const NodeId s = slot[v];
    const NodeId last = unassigned.back();
    unassigned[s] = last;
    slot[last] = s;
    unassigned.pop_back();
  };

  const NodeId base = n / num_parts;
  const NodeId extra = n % num_parts;
  for (NodeId p = 0; p < num_parts; ++p) {
    const NodeId target = base + (p < extra ? 1 : 0);
    NodeId filled = 0;
    std::queue<NodeId> frontier;
    while (filled < target) {
      if (frontier.empty()) {
        frontier.push(unassigned[rng.index(unassigned.size())]);
      }
      const NodeId u = frontier.front();
      frontier.pop();
      if (part[u] >= 0) continue;
      take(u, static_cast<int>(p));
      ++filled;
      for (NodeId w : graph.neighbors(u)) {
        if (part[w] < 0) frontier.push(w);
      }
    }
  }
  return part;
}

// k-means cluster ids of the raw node features.
inline LabelVector prepare_par(const Graph& graph, Index num_clusters, std::uint64_t seed,
                               std::vector<std::string>* warnings = nullptr) {
  if (num_clusters < 1) throw ConfigError("Par: num_clusters must be >= 1");
  const ClusterModel m = kmeans(graph.features(), num_clusters, seed);
  std::vector<int> used(static_cast<std::size_t>(num_clusters), 0);
  for (int y : m.hard_labels) used[y] = 1;
  const int populated = std::accumulate(used.begin(), used.end(), 0);
  if (populated < num_clusters && warnings) {
    warnings->push_back("Par: only " + std::to_string(populated) + " of " + std::to_string(num_clusters) +
                        " feature clusters are populated (degenerate features)");
  }
  return m.hard_labels;
}

inline double cosine_similarity(const DenseMatrix& x, NodeId u, NodeId v) {
  const double nu = x.row(u).norm();
  const double nv = x.row(v).norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return x.row(u).dot(x.row(v)) / (nu * nv);
}

struct PairSimTargets {
  std::vector<NodePair> pairs;  // u < v, unique
  std::vector<double> targets;  // cosine similarity of raw features
};

// Half of the pairs are the most feature-similar pairs in the graph, the
// other half are uniformly random. Targets are raw-feature cosines.
inline PairSimTargets prepare_pairsim(const Graph& graph, std::int64_t num_pairs, std::uint64_t seed) {
  const NodeId n = graph.num_nodes();
  if (n < 2) throw ConfigError("PairSim: need at least 2 nodes");
  if (num_pairs < 1) throw ConfigError("PairSim: num_pairs must be >= 1");
  const std::int64_t total = n * (n - 1) / 2;
  std::set<NodePair> chosen;
  if (num_pairs >= total) {
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) chosen.emplace(u, v);
    }
  } else {
    const std::int64_t top = num_pairs / 2;
    DenseMatrix unit = graph.features();
    for (Index r = 0; r < unit.rows(); ++r) {
      const double nr = unit.row(r).norm();
      if (nr > 0.0) unit.row(r) /= nr;
    }
    // Min-heap on (similarity desc, u asc, v asc): the top holds the worst kept pair.
    struct Scored {
      double sim;
      NodeId u, v;
    };
    auto worse = [](const Scored& a, const Scored& b) {
      if (a.sim != b.sim) return a.sim > b.sim;
      return std::make_pair(a.u, a.v) < std::make_pair(b.u, b.v);
    };
    std::priority_queue<Scored, std::vector<Scored>, decltype(worse)> heap(worse);
    constexpr Index kBlock = 256;
    for (Index r0 = 0; r0 < n && top > 0; r0 += kBlock) {
      const Index rows = std::min<Index>(kBlock, n - r0);
      const DenseMatrix sims = unit.middleRows(r0, rows) * unit.transpose();
      for (Index i = 0; i < rows; ++i) {
        const NodeId u = r0 + i;
        for (NodeId v = u + 1; v < n; ++v) {
          Scored s{sims(i, v), u, v};
          if (static_cast<std::int64_t>(heap.size()) < top) {
            heap.push(s);
          } else if (worse(s, heap.top())) {
            heap.pop();
            heap.push(s);
          }
        }
      }
    }
    while (!heap.empty()) {
      chosen.emplace(heap.top().u, heap.top().v);
      heap.pop();
    }
    RngStream rng(seed);
    while (static_cast<std::int64_t>(chosen.size()) < num_pairs) {
      const NodeId a = static_cast<NodeId>(rng.index(static_cast<std::uint64_t>(n)));
      const NodeId b = static_cast<NodeId>(rng.index(static_cast<std::uint64_t>(n)));
      if (a == b) continue;
      chosen.emplace(std::min(a, b), std::max(a, b));
    }
  }
  PairSimTargets out;
  out.pairs.assign(chosen.begin(), chosen.end());
  out.targets.reserve(out.pairs.size());
  for (auto [u, v] : out.pairs) out.targets.push_back(cosine_similarity(graph.features(), u, v));
  return out;
}

struct PairDisTargets {
  std::vector<NodePair> pairs;  // u < v, unique
  LabelVector buckets;          // min(distance, cap) - 1
  int cap = 4;
};

// Every pair u < v with its distance bucket. Test oracle for small graphs.
inline PairDisTargets exhaustive_pairdis(const Graph& graph, int cap = 4) {
  PairDisTargets out;
  out.cap = cap;
  for (NodeId u = 0; u < graph.num_nodes(); ++u) {
    const auto dist = bfs_distances(graph, u, cap);
    for (NodeId v = u + 1; v < graph.num_nodes(); ++v) {
      out.pairs.emplace_back(u, v);
      out.buckets.push_back(std::min(dist[v], cap) - 1);
    }
  }
  return out;
}

// Pairs drawn by BFS from random anchors: each anchor contributes at most one
// random partner per distance bucket {1, 2, ..., >= cap}. Nodes beyond the cap
// or unreachable fall in the last bucket.
inline PairDisTargets prepare_pairdis(const Graph& graph, std::int64_t num_pairs, int cap, std::uint64_t seed) {
  const NodeId n = graph.num_nodes();
  if (n < 2) throw ConfigError("PairDis: need at least 2 nodes");
  if (num_pairs < 1) throw ConfigError("PairDis: num_pairs must be >= 1");
  if (cap < 1) throw ConfigError("PairDis: cap must be >= 1");
  if (graph.num_edges() == 0) throw UndefinedError("PairDis: graph has no reachable node pairs");
  RngStream rng(seed);
  std::set<NodePair> seen;
  PairDisTargets out;
  out.cap = cap;
  const std::int64_t total = n * (n - 1) / 2;
  const std::int64_t want = std::min(num_pairs, total);
  std::vector<NodeId> anchors(static_cast<std::size_t>(n));
  std::iota(anchors.begin(), anchors.end(), NodeId{0});
  std::vector<std::vector<NodeId>> by_bucket(static_cast<std::size_t>(cap));
  while (static_cast<std::int64_t>(out.pairs.size()) < want) {
    const std::size_t before = out.pairs.size();
    rng.shuffle(std::span<NodeId>(anchors));
    for (NodeId a : anchors) {
      if (static_cast<std::int64_t>(out.pairs.size()) >= want) break;
      const auto dist = bfs_distances(graph, a, cap);
      for (auto& b : by_bucket) b.clear();
      for (NodeId v = 0; v < n; ++v) {
        if (v != a) by_bucket[std::min(dist[v], cap) - 1].push_back(v);
      }
      for (int b = 0; b < cap; ++b) {
        if (by_bucket[b].empty() || static_cast<std::int64_t>(out.pairs.size()) >= want) continue;
        const NodeId v = by_bucket[b][rng.index(by_bucket[b].size())];
        const NodePair p{std::min(a, v), std::max(a, v)};
        if (seen.insert(p).second) {
          out.pairs.push_back(p);
          out.buckets.push_back(b);
        }
      }
    }
    if (out.pairs.size() == before) break;  // saturated
  }
  if (out.pairs.empty()) throw UndefinedError("PairDis: no node pairs could be sampled");
  // canonical order so results do not depend on the anchor sequence
  std::vector<std::size_t> order(out.pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return out.pairs[i] < out.pairs[j]; });
  PairDisTargets sorted;
  sorted.cap = cap;
  for (std::size_t i : order) {
    sorted.pairs.push_back(out.pairs[i]);
    sorted.buckets.push_back(out.buckets[i]);
  }
  return sorted;
}

// ---------------------------------------------------------------------------
// Task interface
// ---------------------------------------------------------------------------

// Trainable auxiliary head of one task.
struct HeadParams {
  std::vector<DenseMatrix> blocks;
};

// Per-step random draw used by the contrastive task: a feature permutation
// for the corrupted graph and the node rows used as positives / negatives.
struct CorruptionDraw {
  std::vector<NodeId> permutation;
  std::vector<NodeId> positives;
  std::vector<NodeId> negatives;
};

inline std::vector<NodeId> sample_without_replacement(NodeId n, NodeId count, RngStream& rng) {
  std::vector<NodeId> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), NodeId{0});
  if (count >= n) return idx;
  for (NodeId i = 0; i < count; ++i) {
    const NodeId j = i + static_cast<NodeId>(rng.index(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Uses every node when N <= samples.
inline CorruptionDraw draw_corruption(NodeId n, NodeId samples, RngStream& rng) {
  CorruptionDraw d;
  d.permutation.resize(static_cast<std::size_t>(n));
  std::iota(d.permutation.begin(), d.permutation.end(), NodeId{0});
  rng.shuffle(std::span<NodeId>(d.permutation));
  d.positives = sample_without_replacement(n, samples, rng);
  d.negatives = sample_without_replacement(n, samples, rng);
  return d;
}

struct TaskInput {
  const Embeddings& z;
  const Embeddings* z_corrupt = nullptr;
  const CorruptionDraw* draw = nullptr;
};

struct TaskOutput {
  double loss = 0.0;
  DenseMatrix grad_z;
  DenseMatrix grad_z_corrupt;  // empty unless the task reads the corrupted embeddings
  std::vector<DenseMatrix> grad_head;
};

class PretextTask {
 public:
  virtual ~PretextTask() = default;
  virtual std::string_view name() const = 0;
  virtual HeadParams init_head(Index hidden, RngStream& rng) const = 0;
  virtual TaskOutput loss_and_grad(const TaskInput& in, const HeadParams& head) const = 0;
  virtual bool uses_corruption() const { return false; }
};

namespace detail {

inline DenseMatrix glorot(Index rows, Index cols, RngStream& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  DenseMatrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-limit, limit);
  return m;
}

inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Mean softmax cross-entropy of logits against integer targets.
// Returns the loss and overwrites `logits` with dLoss/dlogits.
inline double softmax_xent(DenseMatrix& logits, std::span<const int> targets) {
  const Index m = logits.rows();
  double loss = 0.0;
  for (Index i = 0; i < m; ++i) {
    const double mx = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Index c = 0; c < logits.cols(); ++c) {
      logits(i, c) = std::exp(logits(i, c) - mx);
      sum += logits(i, c);
    }
    const double p_true = logits(i, targets[i]) / sum;
    loss -= std::log(std::max(p_true, std::numeric_limits<double>::min()));
    logits.row(i) /= sum;
    logits(i, targets[i]) -= 1.0;
  }
  logits /= static_cast<double>(m);
  return loss / static_cast<double>(m);
}

inline void check_finite_loss(double loss, std::string_view task) {
  if (!std::isfinite(loss)) throw NumericError("task '" + std::string(task) + "' produced a non-finite loss");
}

}  // namespace detail

// Node classification on fixed pseudo-labels through a linear head (Clu, Par).
class NodeClassificationTask : public PretextTask {
 public:
  NodeClassificationTask(std::string name, LabelVector labels)
      : name_(std::move(name)), labels_(std::move(labels)) {
    num_classes_ = labels_.empty() ? 1 : *std::max_element(labels_.begin(), labels_.end()) + 1;
  }

  std::string_view name() const override { return name_; }
  const LabelVector& labels() const { return labels_; }
  int num_classes() const { return num_classes_; }

  HeadParams init_head(Index hidden, RngStream& rng) const override {
    return {{detail::glorot(hidden, num_classes_, rng), DenseMatrix::Zero(1, num_classes_)}};
  }

  TaskOutput loss_and_grad(const TaskInput& in, const HeadParams& head) const override {
    const DenseMatrix& w = head.blocks[0];
    const DenseMatrix& b = head.blocks[1];
    if (in.z.rows() != static_cast<Index>(labels_.size())) throw DimensionError(name_ + ": embedding rows");
    DenseMatrix logits = in.z * w;
    logits.rowwise() += b.row(0);
    TaskOutput out;
    out.loss = detail::softmax_xent(logits, labels_);
    detail::check_finite_loss(out.loss, name_);
    out.grad_z = logits * w.transpose();
    out.grad_head = {in.z.transpose() * logits, logits.colwise().sum()};
    return out;
  }

 private:
  std::string name_;
  LabelVector labels_;
  int num_classes_ = 1;
};

// Regress raw-feature cosine from |z_u - z_v| with a linear head.
class PairSimTask : public PretextTask {
 public:
  explicit PairSimTask(PairSimTargets targets) : t_(std::move(targets)) {}

  std::string_view name() const override { return "PairSim"; }
  const PairSimTargets& targets() const { return t_; }

  HeadParams init_head(Index hidden, RngStream& rng) const override {
    return {{detail::glorot(hidden, 1, rng), DenseMatrix::Zero(1, 1)}};
  }

  TaskOutput loss_and_grad(const TaskInput& in, const HeadParams& head) const override {
    const DenseMatrix& w = head.blocks[0];
    const double b = head.blocks[1](0, 0);
    const Index m = static_cast<Index>(t_.pairs.size());
    const Index h = in.z.cols();
    TaskOutput out;
    out.grad_z = DenseMatrix::Zero(in.z.rows(), h);
    DenseMatrix gw = DenseMatrix::Zero(h, 1);
    double gb = 0.0;
    double loss = 0.0;
    Eigen::RowVectorXd diff(h), absdiff(h);
    for (Index i = 0; i < m; ++i) {
      const auto [u, v] = t_.pairs[i];
      diff = in.z.row(u) - in.z.row(v);
      absdiff = diff.cwiseAbs();
      const double pred = absdiff.dot(w.col(0).transpose()) + b;
      const double r = pred - t_.targets[i];
      loss += r * r;
      const double g = 2.0 * r / static_cast<double>(m);
      gw.col(0) += g * absdiff.transpose();
      gb += g;
      for (Index c = 0; c < h; ++c) {
        const double s = diff(c) > 0.0 ? 1.0 : (diff(c) < 0.0 ? -1.0 : 0.0);
        const double dz = g * w(c, 0) * s;
        out.grad_z(u, c) += dz;
        out.grad_z(v, c) -= dz;
      }
    }
    out.loss = loss / static_cast<double>(m);
    detail::check_finite_loss(out.loss, name());
    out.grad_head = {std::move(gw), DenseMatrix::Constant(1, 1, gb)};
    return out;
  }

 private:
  PairSimTargets t_;
};

// Classify the distance bucket of a node pair from [z_u || z_v].
class PairDisTask : public PretextTask {
 public:
  explicit PairDisTask(PairDisTargets targets) : t_(std::move(targets)) {}

  std::string_view name() const override { return "PairDis"; }
  const PairDisTargets& targets() const { return t_; }

  HeadParams init_head(Index hidden, RngStream& rng) const override {
    return {{detail::glorot(2 * hidden, t_.cap, rng), DenseMatrix::Zero(1, t_.cap)}};
  }

  TaskOutput loss_and_grad(const TaskInput& in, const HeadParams& head) const override {
    const DenseMatrix& w = head.blocks[0];
    const DenseMatrix& b = head.blocks[1];
    const Index m = static_cast<Index>(t_.pairs.size());
    const Index h = in.z.cols();
    DenseMatrix x(m, 2 * h);
    for (Index i = 0; i < m; ++i) {
      x.row(i).head(h) = in.z.row(t_.pairs[i].first);
      x.row(i).tail(h) = in.z.row(t_.pairs[i].second);
    }
    DenseMatrix logits = x * w;
    logits.rowwise() += b.row(0);
    TaskOutput out;
    out.loss = detail::softmax_xent(logits, t_.buckets);
    detail::check_finite_loss(out.loss, name());
    const DenseMatrix gx = logits * w.transpose();
    out.grad_z = DenseMatrix::Zero(in.z.rows(), h);
    for (Index i = 0; i < m; ++i) {
      out.grad_z.row(t_.pairs[i].first) += gx.row(i).head(h);
      out.grad_z.row(t_.pairs[i].second) += gx.row(i).tail(h);
    }
    out.grad_head = {x.transpose() * logits, logits.colwise().sum()};
    return out;
  }

 private:
  PairDisTargets t_;
};

// Contrastive local-global mutual information task.
//
// Summary s = sigmoid(mean of all rows of Z); discriminator logit z^T W s + b;
// binary cross-entropy with positives taken from Z and negatives from the
// embeddings of the feature-shuffled graph.
class DgiTask : public PretextTask {
 public:
  explicit DgiTask(NodeId samples = 2000) : samples_(samples) {}

  std::string_view name() const override { return "Dgi"; }
  bool uses_corruption() const override { return true; }
  NodeId samples() const { return samples_; }

  HeadParams init_head(Index hidden, RngStream& rng) const override {
    return {{detail::glorot(hidden, hidden, rng), DenseMatrix::Zero(1, 1)}};
  }

  TaskOutput loss_and_grad(const TaskInput& in, const HeadParams& head) const override {
    if (!in.z_corrupt || !in.draw) throw ConfigError("Dgi: corrupted embeddings and draw are required");
    const DenseMatrix& w = head.blocks[0];
    const double bias = head.blocks[1](0, 0);
    const DenseMatrix& z = in.z;
    const DenseMatrix& zc = *in.z_corrupt;
    const Index n = z.rows();
    const Index h = z.cols();
    const Eigen::RowVectorXd mean = z.colwise().mean();
    Eigen::RowVectorXd s(h);
    for (Index c = 0; c < h; ++c) s(c) = detail::sigmoid(mean(c));
    const Eigen::RowVectorXd v = (w * s.transpose()).transpose();

    const auto& pos = in.draw->positives;
    const auto& neg = in.draw->negatives;
    const double count = static_cast<double>(pos.size() + neg.size());
    TaskOutput out;
    out.grad_z = DenseMatrix::Zero(n, h);
    out.grad_z_corrupt = DenseMatrix::Zero(n, h);
    Eigen::RowVectorXd dv = Eigen::RowVectorXd::Zero(h);
    double db = 0.0;
    double loss = 0.0;
    for (NodeId i : pos) {
      const double logit = z.row(i).dot(v) + bias;
      loss += detail::softplus(-logit);
      const double g = (detail::sigmoid(logit) - 1.0) / count;
      out.grad_z.row(i) += g * v;
      dv += g * z.row(i);
      db += g;
    }
    for (NodeId i : neg) {
      const double logit = zc.row(i).dot(v) + bias;
      loss += detail::softplus(logit);
      const double g = detail::sigmoid(logit) / count;
      out.grad_z_corrupt.row(i) += g * v;
      dv += g * zc.row(i);
      db += g;
    }
    out.loss = loss / count;
    detail::check_finite_loss(out.loss, name());
    // v = W s  =>  dW = dv^T s, ds = W^T dv
    DenseMatrix dw = dv.transpose() * s;
    Eigen::RowVectorXd ds = dv * w;
    Eigen::RowVectorXd dmean(h);
    for (Index c = 0; c < h; ++c) dmean(c) = ds(c) * s(c) * (1.0 - s(c)) / static_cast<double>(n);
    out.grad_z.rowwise() += dmean;
    out.grad_head = {std::move(dw), DenseMatrix::Constant(1, 1, db)};
    return out;
  }

 private:
  NodeId samples_;
};

// ---------------------------------------------------------------------------
// Task set
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& all_task_names() {
  static const std::vector<std::string> names = {"Clu", "Par", "PairSim", "PairDis", "Dgi"};
  return names;
}

struct TaskOptions {
  NodeId clu_parts = 10;
  Index par_clusters = 10;
  std::int64_t pairsim_pairs = 4000;
  std::int64_t pairdis_pairs = 4000;
  int pairdis_cap = 4;
  NodeId dgi_samples = 2000;
};

// Ordered, immutable list of tasks; weight index i refers to task i.
class TaskSet {
 public:
  TaskSet() = default;
  explicit TaskSet(std::vector<std::shared_ptr<const PretextTask>> tasks) : tasks_(std::move(tasks)) {
    if (tasks_.empty()) throw ConfigError("task set must contain at least one task");
    std::set<std::string_view> seen;
    for (const auto& t : tasks_) {
      if (!seen.insert(t->name()).second) throw ConfigError("duplicate task '" + std::string(t->name()) + "'");
    }
  }

  std::size_t size() const { return tasks_.size(); }
  const PretextTask& operator[](std::size_t i) const { return *tasks_[i]; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& t : tasks_) out.emplace_back(t->name());
    return out;
  }

  std::ptrdiff_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      if (tasks_[i]->name() == name) return static_cast<std::ptrdiff_t>(i);
    }
    return -1;
  }

  bool any_uses_corruption() const {
    return std::any_of(tasks_.begin(), tasks_.end(), [](const auto& t) { return t->uses_corruption(); });
  }

 private:
  std::vector<std::shared_ptr<const PretextTask>> tasks_;
};

// Builds tasks by name, preparing each task's pseudo-targets from a seed
// derived from (seed, task name) so task preparation is order-independent.
inline TaskSet make_task_set(const Graph& graph, const std::vector<std::string>& names, const TaskOptions& opt,
                             std::uint64_t seed, std::vector<std::string>* warnings = nullptr) {
  const RngStream root(seed);
  std::vector<std::shared_ptr<const PretextTask>> tasks;
  for (const auto& name : names) {
    const std::uint64_t task_seed = root.derive(name).next_u64();
    if (name == "Clu") {
      const NodeId parts = std::min<NodeId>(opt.clu_parts, graph.num_nodes());
      tasks.push_back(std::make_shared<NodeClassificationTask>("Clu", prepare_clu(graph, parts, task_seed)));
    } else if (name == "Par") {
      const Index k = std::min<Index>(opt.par_clusters, graph.num_nodes());
      tasks.push_back(std::make_shared<NodeClassificationTask>("Par", prepare_par(graph, k, task_seed, warnings)));
    } else if (name == "PairSim") {
      tasks.push_back(std::make_shared<PairSimTask>(prepare_pairsim(graph, opt.pairsim_pairs, task_seed)));
    } else if (name == "PairDis") {
      tasks.push_back(
          std::make_shared<PairDisTask>(prepare_pairdis(graph, opt.pairdis_pairs, opt.pairdis_cap, task_seed)));
    } else if (name == "Dgi") {
      tasks.push_back(std::make_shared<DgiTask>(opt.dgi_samples));
    } else {
      throw ConfigError("unknown task '" + name + "' (known: Clu, Par, PairSim, PairDis, Dgi)");
    }
  }
  return TaskSet(std::move(tasks));
}

}  // namespace autossl
