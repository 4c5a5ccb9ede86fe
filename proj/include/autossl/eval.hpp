#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "autossl/cluster.hpp"
#include "autossl/graph.hpp"
#include "autossl/graph_io.hpp"
#include "autossl/rng.hpp"

namespace autossl {

namespace detail {

inline std::vector<int> compact_labels(std::span<const int> labels, int& num) {
  std::map<int, int> ids;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = ids.try_emplace(labels[i], static_cast<int>(ids.size())).first;
    out[i] = it->second;
  }
  num = static_cast<int>(ids.size());
  return out;
}

inline double entropy_of_counts(std::span<const double> counts, double total) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / total) * std::log(c / total);
  }
  return h;
}

}  // namespace detail

// Normalized mutual information, MI / ((H(pred) + H(truth)) / 2).
// Zero when either labeling has zero entropy.
inline double nmi(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw DimensionError("nmi: label vectors differ in length");
  if (pred.empty()) return 0.0;
  int ka = 0, kb = 0;
  const auto a = detail::compact_labels(pred, ka);
  const auto b = detail::compact_labels(truth, kb);
  const double n = static_cast<double>(pred.size());
  std::vector<double> joint(static_cast<std::size_t>(ka) * kb, 0.0), ca(ka, 0.0), cb(kb, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[static_cast<std::size_t>(a[i]) * kb + b[i]] += 1.0;
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
  }
  const double ha = detail::entropy_of_counts(ca, n);
  const double hb = detail::entropy_of_counts(cb, n);
  if (ha <= 0.0 || hb <= 0.0) return 0.0;
  double mi = 0.0;
  for (int i = 0; i < ka; ++i) {
    for (int j = 0; j < kb; ++j) {
      const double c = joint[static_cast<std::size_t>(i) * kb + j];
      if (c > 0.0) mi += (c / n) * std::log(c * n / (ca[i] * cb[j]));
    }
  }
  return std::clamp(mi / (0.5 * (ha + hb)), 0.0, 1.0);
}

struct Split {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;
};

// Random split with the given train / validation fractions; the rest is test.
inline Split random_split(NodeId n, std::uint64_t seed, double train_frac = 0.1, double val_frac = 0.1) {
  if (train_frac < 0 || val_frac < 0 || train_frac + val_frac > 1.0) throw ConfigError("split fractions");
  std::vector<NodeId> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), NodeId{0});
  RngStream rng(seed);
  rng.shuffle(std::span<NodeId>(perm));
  const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(val_frac * static_cast<double>(n)));
  Split s;
  s.train.assign(perm.begin(), perm.begin() + n_train);
  s.val.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
  s.test.assign(perm.begin() + n_train + n_val, perm.end());
  for (auto* v : {&s.train, &s.val, &s.test}) std::sort(v->begin(), v->end());
  return s;
}

// Public split files train_idx.txt / val_idx.txt / test_idx.txt, when present in a graph directory.
inline std::optional<Split> load_split(const std::filesystem::path& dir, NodeId n) {
  const auto tr = dir / "train_idx.txt";
  const auto va = dir / "val_idx.txt";
  const auto te = dir / "test_idx.txt";
  if (!std::filesystem::exists(tr) || !std::filesystem::exists(te)) return std::nullopt;
  Split s;
  s.train = read_index_list(tr, n);
  if (std::filesystem::exists(va)) s.val = read_index_list(va, n);
  s.test = read_index_list(te, n);
  return s;
}

struct LogisticOptions {
  double l2 = 1e-4;
  double grad_tol = 1e-5;
  int max_iter = 2000;
};

struct LogisticModel {
  DenseMatrix weight;  // d x C
  DenseMatrix bias;    // 1 x C
  int iterations = 0;
  int num_classes = 0;

  LabelVector predict(const DenseMatrix& x) const {
    DenseMatrix logits = x * weight;
    logits.rowwise() += bias.row(0);
    LabelVector out(static_cast<std::size_t>(x.rows()));
    for (Index i = 0; i < x.rows(); ++i) {
      Index arg = 0;
      logits.row(i).maxCoeff(&arg);
      out[i] = static_cast<int>(arg);
    }
    return out;
  }
};

// Multinomial logistic regression on the training rows only, full-batch
// gradient descent with step 1/L (L the smoothness constant), zero init.
inline LogisticModel train_logistic(const DenseMatrix& x, std::span<const int> labels, std::span<const NodeId> train,
                                    const LogisticOptions& opt = {}) {
  if (train.empty()) throw ConfigError("logistic probe: empty training set");
  int num_classes = 0;
  for (NodeId i : train) num_classes = std::max(num_classes, labels[i] + 1);
  {
    std::vector<int> present(static_cast<std::size_t>(num_classes), 0);
    for (NodeId i : train) present[labels[i]] = 1;
    if (std::accumulate(present.begin(), present.end(), 0) < 2) {
      throw ConfigError("logistic probe: training set contains a single class");
    }
  }
  const Index m = static_cast<Index>(train.size());
  const Index d = x.cols();
  DenseMatrix xt(m, d);
  for (Index r = 0; r < m; ++r) xt.row(r) = x.row(train[r]);

  // Softmax cross-entropy Hessian is bounded by 1/2 * [X 1]^T [X 1] / m.
  DenseMatrix aug(m, d + 1);
  aug.leftCols(d) = xt;
  aug.col(d).setOnes();
  const DenseMatrix gram = aug.transpose() * aug / static_cast<double>(m);
  const double top = Eigen::SelfAdjointEigenSolver<DenseMatrix>(gram, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  const double lipschitz = 0.5 * top + opt.l2;
  const double step = 1.0 / std::max(lipschitz, 1e-12);

  LogisticModel model;
  model.num_classes = num_classes;
  model.weight = DenseMatrix::Zero(d, num_classes);
  model.bias = DenseMatrix::Zero(1, num_classes);
  for (int it = 0; it < opt.max_iter; ++it) {
    DenseMatrix p = xt * model.weight;
    p.rowwise() += model.bias.row(0);
    for (Index r = 0; r < m; ++r) {
      const double mx = p.row(r).maxCoeff();
      p.row(r) = (p.row(r).array() - mx).exp().matrix();
      p.row(r) /= p.row(r).sum();
      p(r, labels[train[r]]) -= 1.0;
    }
    p /= static_cast<double>(m);
    const DenseMatrix gw = xt.transpose() * p + opt.l2 * model.weight;
    const DenseMatrix gb = p.colwise().sum();
    model.iterations = it + 1;
    const double gnorm = std::sqrt(gw.squaredNorm() + gb.squaredNorm());
    if (gnorm < opt.grad_tol) break;
    model.weight -= step * gw;
    model.bias -= step * gb;
  }
  return model;
}

inline double accuracy(std::span<const int> pred, std::span<const int> truth, std::span<const NodeId> rows) {
  if (rows.empty()) return 0.0;
  std::size_t hit = 0;
  for (NodeId i : rows) hit += pred[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(rows.size());
}

// Test accuracy of a logistic-regression probe on frozen embeddings.
inline double logistic_probe(const DenseMatrix& embeddings, std::span<const int> labels, const Split& split,
                             double l2 = 1e-4) {
  LogisticOptions opt;
  opt.l2 = l2;
  const LogisticModel model = train_logistic(embeddings, labels, split.train, opt);
  const LabelVector pred = model.predict(embeddings);
  return accuracy(pred, labels, split.test);
}

// Node clustering protocol: k-means with k = number of classes, then NMI against the truth.
inline double cluster_eval(const DenseMatrix& embeddings, std::span<const int> truth, std::uint64_t seed,
                           int restarts = 3) {
  int k = 0;
  const auto compact = detail::compact_labels(truth, k);
  (void)compact;
  const ClusterModel m = kmeans(embeddings, std::max(1, k), seed, 100, restarts);
  return nmi(m.hard_labels, truth);
}

inline double cluster_eval(const Graph& graph, const DenseMatrix& embeddings, std::uint64_t seed, int restarts = 3) {
  return cluster_eval(embeddings, graph.labels(), seed, restarts);
}

}  // namespace autossl
