#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "autossl/graph.hpp"
#include "autossl/numeric.hpp"
#include "autossl/rng.hpp"

namespace autossl {

struct ClusterModel {
  DenseMatrix centroids;        // k x d
  Index k = 0;
  double two_sigma_sq = 1e-3;   // variance scale of the soft assignment
  LabelVector hard_labels;
  DenseMatrix posteriors;       // N x k, filled by soft_assign
  double inertia = 0.0;
};

struct KMeansOptions {
  Index k = 5;
  int max_iter = 100;
  int restarts = 3;
};

namespace detail {

inline double squared_distance(const DenseMatrix& a, Index i, const DenseMatrix& b, Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

// Assigns each point to its nearest centroid (lowest index wins ties); returns inertia.
inline double assign_points(const DenseMatrix& points, const DenseMatrix& centroids, LabelVector& labels,
                            std::vector<double>& best_dist) {
  const Index n = points.rows();
  const Index k = centroids.rows();
  labels.resize(static_cast<std::size_t>(n));
  best_dist.resize(static_cast<std::size_t>(n));
  // ||x||^2 - 2 x.c + ||c||^2 through one GEMM; exact distances recomputed for the winner.
  const DenseMatrix cross = points * centroids.transpose();
  const Vector c_norm = centroids.rowwise().squaredNorm();
  double inertia = 0.0;
  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < k; ++c) {
      const double val = c_norm(c) - 2.0 * cross(i, c);
      if (val < best_val) {
        best_val = val;
        best = c;
      }
    }
    labels[i] = static_cast<int>(best);
    best_dist[i] = squared_distance(points, i, centroids, best);
    inertia += best_dist[i];
  }
  return inertia;
}

inline DenseMatrix kmeans_pp_seed(const DenseMatrix& points, Index k, RngStream& rng) {
  const Index n = points.rows();
  DenseMatrix centroids(k, points.cols());
  centroids.row(0) = points.row(static_cast<Index>(rng.index(static_cast<std::uint64_t>(n))));
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) d2[i] = squared_distance(points, i, centroids, 0);
  for (Index c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(rng.index(static_cast<std::uint64_t>(n)));
    }
    centroids.row(c) = points.row(pick);
    for (Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points, i, centroids, c));
  }
  return centroids;
}

inline ClusterModel lloyd(const DenseMatrix& points, Index k, int max_iter, RngStream& rng) {
  const Index n = points.rows();
  ClusterModel m;
  m.k = k;
  m.centroids = kmeans_pp_seed(points, k, rng);
  std::vector<double> dist;
  LabelVector prev;
  m.inertia = assign_points(points, m.centroids, m.hard_labels, dist);
  for (int it = 0; it < max_iter; ++it) {
    DenseMatrix sums = DenseMatrix::Zero(k, points.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      sums.row(m.hard_labels[i]) += points.row(i);
      ++counts[m.hard_labels[i]];
    }
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    for (Index c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        m.centroids.row(c) = sums.row(c) / static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: move it onto the point farthest from its centroid.
      Index far = -1;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        if (!taken[i] && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      }
      if (far >= 0) {
        taken[far] = true;
        m.centroids.row(c) = points.row(far);
      }
    }
    prev = m.hard_labels;
    m.inertia = assign_points(points, m.centroids, m.hard_labels, dist);
    if (m.hard_labels == prev) break;
  }
  return m;
}

}  // namespace detail

// Lloyd's algorithm with k-means++ seeding; best inertia over restarts.
inline ClusterModel kmeans(const DenseMatrix& points, Index k, std::uint64_t seed, int max_iter = 100,
                           int restarts = 3) {
  if (k < 1) throw ConfigError("kmeans: k must be >= 1");
  if (k > points.rows()) {
    throw ConfigError("kmeans: k=" + std::to_string(k) + " exceeds the number of points " +
                      std::to_string(points.rows()));
  }
  if (max_iter < 1) throw ConfigError("kmeans: max_iter must be >= 1");
  if (!points.allFinite()) throw NumericError("kmeans: non-finite input");
  RngStream rng(seed);
  ClusterModel best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    ClusterModel m = detail::lloyd(points, k, max_iter, rng);
    if (m.inertia < best.inertia) best = std::move(m);
  }
  return best;
}

inline ClusterModel kmeans(const DenseMatrix& points, const KMeansOptions& opt, std::uint64_t seed) {
  return kmeans(points, opt.k, seed, opt.max_iter, opt.restarts);
}

// Homophily of the graph under k-means labels of the embeddings.
inline double pseudo_homophily(const Graph& graph, const DenseMatrix& embeddings, Index k, std::uint64_t seed,
                               int max_iter = 100, int restarts = 3) {
  if (graph.num_edges() == 0) throw UndefinedError("pseudo_homophily: graph has no edges");
  const ClusterModel m = kmeans(embeddings, k, seed, max_iter, restarts);
  return homophily(graph, m.hard_labels);
}

// p(c_i | x) = softmax_i(-||x - c_i||^2 / (2 sigma^2)), max-subtracted.
inline DenseMatrix soft_assign(const DenseMatrix& embeddings, const DenseMatrix& centroids, double two_sigma_sq) {
  if (embeddings.cols() != centroids.cols()) {
    throw DimensionError("soft_assign: embedding width " + std::to_string(embeddings.cols()) +
                         " != centroid width " + std::to_string(centroids.cols()));
  }
  if (!(two_sigma_sq > 0.0)) throw DomainError("soft_assign: 2 sigma^2 must be positive");
  const Index n = embeddings.rows();
  const Index k = centroids.rows();
  DenseMatrix p(n, k);
  for (Index i = 0; i < n; ++i) {
    // shift by the nearest squared distance before scaling so huge distances or
    // tiny variances cannot produce inf - inf
    double nearest = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < k; ++c) {
      p(i, c) = (embeddings.row(i) - centroids.row(c)).squaredNorm();
      nearest = std::min(nearest, p(i, c));
    }
    double sum = 0.0;
    for (Index c = 0; c < k; ++c) {
      p(i, c) = std::exp(-((p(i, c) - nearest) / two_sigma_sq));
      sum += p(i, c);
    }
    p.row(i) /= sum;
  }
  return p;
}

inline DenseMatrix soft_assign(const DenseMatrix& embeddings, ClusterModel& model) {
  model.posteriors = soft_assign(embeddings, model.centroids, model.two_sigma_sq);
  return model.posteriors;
}

struct HomophilyLoss {
  double value = 0.0;
  DenseMatrix grad_posteriors;  // N x k
};

// H = 1/(k|E|) sum_i sum_{(u,v) in E} |p_i(u) - p_i(v)|, edges counted once.
// Subgradient of |.| at 0 is taken as 0.
inline HomophilyLoss homophily_loss(const Graph& graph, const DenseMatrix& posteriors) {
  if (posteriors.rows() != graph.num_nodes()) throw DimensionError("homophily_loss: posterior row count");
  if (graph.num_edges() == 0) throw UndefinedError("homophily_loss: graph has no edges");
  const Index k = posteriors.cols();
  const double scale = 1.0 / (static_cast<double>(k) * static_cast<double>(graph.num_edges()));
  HomophilyLoss out;
  out.grad_posteriors = DenseMatrix::Zero(posteriors.rows(), k);
  double total = 0.0;
  for (const Edge& e : graph.edges()) {
    for (Index c = 0; c < k; ++c) {
      const double diff = posteriors(e.u, c) - posteriors(e.v, c);
      total += std::abs(diff);
      const double s = diff > 0.0 ? scale : (diff < 0.0 ? -scale : 0.0);
      out.grad_posteriors(e.u, c) += s;
      out.grad_posteriors(e.v, c) -= s;
    }
  }
  out.value = total * scale;
  return out;
}

// Backpropagates dH/dP through the soft assignment with centroids held fixed.
inline DenseMatrix soft_assign_backward(const DenseMatrix& embeddings, const DenseMatrix& centroids,
                                        double two_sigma_sq, const DenseMatrix& posteriors,
                                        const DenseMatrix& grad_posteriors) {
  const Index n = embeddings.rows();
  const Index k = centroids.rows();
  DenseMatrix grad = DenseMatrix::Zero(n, embeddings.cols());
  for (Index i = 0; i < n; ++i) {
    const double mean_g = posteriors.row(i).dot(grad_posteriors.row(i));
    // dL/da_c = p_c (g_c - sum_l p_l g_l); a_c = -||x - c||^2 / tau; sum_c dL/da_c = 0,
    // so dL/dx = (2/tau) sum_c dL/da_c * c.
    for (Index c = 0; c < k; ++c) {
      const double da = posteriors(i, c) * (grad_posteriors(i, c) - mean_g);
      if (da != 0.0) grad.row(i) += (2.0 / two_sigma_sq) * da * (centroids.row(c) - embeddings.row(i));
    }
  }
  return grad;
}

struct HomophilyLossEval {
  double value = 0.0;
  DenseMatrix posteriors;
  DenseMatrix grad_embeddings;
};

// H and dH/dZ for embeddings Z against fixed centroids.
inline HomophilyLossEval homophily_loss_grad_embeddings(const Graph& graph, const DenseMatrix& embeddings,
                                                        const DenseMatrix& centroids, double two_sigma_sq) {
  HomophilyLossEval out;
  out.posteriors = soft_assign(embeddings, centroids, two_sigma_sq);
  HomophilyLoss h = homophily_loss(graph, out.posteriors);
  out.value = h.value;
  out.grad_embeddings = soft_assign_backward(embeddings, centroids, two_sigma_sq, out.posteriors, h.grad_posteriors);
  return out;
}

inline HomophilyLossEval homophily_loss_grad_embeddings(const Graph& graph, const DenseMatrix& embeddings,
                                                        const ClusterModel& model) {
  return homophily_loss_grad_embeddings(graph, embeddings, model.centroids, model.two_sigma_sq);
}

}  // namespace autossl
