#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "autossl/graph.hpp"

namespace autossl {

namespace detail {

// x log x with 0 log 0 = 0
inline double xlogx(double x) { return x <= 0.0 ? 0.0 : x * std::log(x); }

}  // namespace detail

// Mutual information (nats) between two binary labelings via the 2x2 contingency table.
inline double mutual_information_binary(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DimensionError("mutual_information_binary: length mismatch");
  if (a.empty()) throw DomainError("mutual_information_binary: empty labelings");
  double joint[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] != 0 && a[i] != 1) || (b[i] != 0 && b[i] != 1)) {
      throw DomainError("mutual_information_binary: labels must be 0 or 1");
    }
    joint[a[i]][b[i]] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  const double pa[2] = {(joint[0][0] + joint[0][1]) / n, (joint[1][0] + joint[1][1]) / n};
  const double pb[2] = {(joint[0][0] + joint[1][0]) / n, (joint[0][1] + joint[1][1]) / n};
  double mi = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double p = joint[i][j] / n;
      if (p > 0.0) mi += p * std::log(p / (pa[i] * pb[j]));
    }
  }
  return std::max(mi, 0.0);
}

// Delta = (h_B - h_A) |E| / (2 d_max).
inline double delta(double h_a, double h_b, std::int64_t num_edges, std::int64_t d_max) {
  if (!(h_a < h_b)) throw DomainError("delta: requires h_A < h_B");
  if (d_max < 1) throw DomainError("delta: requires d_max >= 1");
  return (h_b - h_a) * static_cast<double>(num_edges) / (2.0 * static_cast<double>(d_max));
}

// U = (1/N) [2 D ln(4D/N) + 2 (N/2 - D) ln(4 (N/2 - D)/N)], defined for 0 <= D <= N/4, N even.
inline double mi_upper_bound(double d, std::int64_t n) {
  if (n <= 0 || n % 2 != 0) throw DomainError("mi_upper_bound: N must be a positive even count");
  const double nn = static_cast<double>(n);
  if (!(d >= 0.0) || d > nn / 4.0) {
    throw DomainError("mi_upper_bound: Delta=" + std::to_string(d) + " outside [0, N/4]");
  }
  const double rest = nn / 2.0 - d;
  // 2 D ln(4D/N) = (N/2) * xlogx(4D/N)
  return (0.5 * nn * detail::xlogx(4.0 * d / nn) + 0.5 * nn * detail::xlogx(4.0 * rest / nn)) / nn;
}

// True when U(Delta) is strictly decreasing across `points` evenly spaced Delta in [0, N/4].
inline bool bound_strictly_decreasing(std::int64_t n, int points = 1000) {
  const double hi = static_cast<double>(n) / 4.0;
  double prev = mi_upper_bound(0.0, n);
  for (int i = 1; i <= points; ++i) {
    const double cur = mi_upper_bound(hi * i / points, n);
    if (!(cur < prev)) return false;
    prev = cur;
  }
  return true;
}

struct TheoremReport {
  std::string graph;
  std::int64_t num_nodes = 0;
  double h_b = 0.0;
  std::int64_t num_labelings = 0;     // balanced A enumerated
  std::int64_t checked = 0;           // A with h_A < h_B and Delta <= N/4
  std::int64_t excluded_not_below = 0;  // h_A >= h_B
  std::int64_t excluded_delta = 0;      // Delta > N/4
  std::int64_t violations = 0;        // MI(A,B) > U_{A,B}
  double min_gap = std::numeric_limits<double>::infinity();  // min U - MI over checked A
  std::int64_t monotonicity_violations = 0;
  bool monotone = true;
};

inline constexpr std::int64_t kTheoremMaxNodes = 12;

// Exhaustively checks MI(A,B) <= U_{A,B} over all balanced binary A, and that
// U increases with h_A over the observed homophily values below h_B.
inline TheoremReport verify_theorem(const Graph& graph, std::span<const int> b, const std::string& name = "graph") {
  const std::int64_t n = graph.num_nodes();
  if (n % 2 != 0) throw DomainError("verify_theorem: N must be even for balanced classes");
  if (n > kTheoremMaxNodes) throw DomainError("verify_theorem: exhaustive check limited to N <= 12");
  if (graph.num_edges() == 0) throw UndefinedError("verify_theorem: graph has no edges");
  if (static_cast<std::int64_t>(b.size()) != n) throw DimensionError("verify_theorem: label length");
  std::int64_t ones = 0;
  for (int y : b) {
    if (y != 0 && y != 1) throw DomainError("verify_theorem: B must be binary");
    ones += y;
  }
  if (ones * 2 != n) throw DomainError("verify_theorem: B must be balanced");

  TheoremReport r;
  r.graph = name;
  r.num_nodes = n;
  r.h_b = homophily(graph, b);
  const double quarter = static_cast<double>(n) / 4.0;
  std::map<double, double> bound_by_h;
  std::vector<int> a(static_cast<std::size_t>(n));
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) * 2 != n) continue;
    for (std::int64_t i = 0; i < n; ++i) a[i] = (mask >> i) & 1u;
    ++r.num_labelings;
    const double h_a = homophily(graph, a);
    if (!(h_a < r.h_b)) {
      ++r.excluded_not_below;
      continue;
    }
    const double d = delta(h_a, r.h_b, graph.num_edges(), graph.max_degree());
    if (d > quarter) {
      ++r.excluded_delta;
      continue;
    }
    ++r.checked;
    const double u = mi_upper_bound(d, n);
    const double mi = mutual_information_binary(a, b);
    if (mi > u + 1e-12) ++r.violations;
    r.min_gap = std::min(r.min_gap, u - mi);
    bound_by_h[h_a] = u;
  }
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& [h, u] : bound_by_h) {
    if (!(u > prev)) ++r.monotonicity_violations;
    prev = u;
  }
  r.monotone = r.monotonicity_violations == 0;
  return r;
}

// Small test graphs with balanced binary ground truth.
struct TheoryCase {
  std::string name;
  Graph graph;
  LabelVector truth;
};

inline Graph make_cycle(NodeId n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return Graph(n, std::move(e), DenseMatrix::Ones(n, 1));
}

inline Graph make_path(NodeId n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph(n, std::move(e), DenseMatrix::Ones(n, 1));
}

inline Graph make_complete(NodeId n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
  }
  return Graph(n, std::move(e), DenseMatrix::Ones(n, 1));
}

// First half labeled 0, second half 1.
inline LabelVector half_blocks(NodeId n) {
  LabelVector y(static_cast<std::size_t>(n), 0);
  for (NodeId i = n / 2; i < n; ++i) y[i] = 1;
  return y;
}

inline std::vector<TheoryCase> theory_corpus(std::uint64_t seed = 7) {
  std::vector<TheoryCase> out;
  for (NodeId n : {8, 10, 12}) out.push_back({"cycle-" + std::to_string(n), make_cycle(n), half_blocks(n)});
  for (NodeId n : {8, 12}) out.push_back({"path-" + std::to_string(n), make_path(n), half_blocks(n)});
  out.push_back({"complete-4", make_complete(4), half_blocks(4)});
  out.push_back({"complete-6", make_complete(6), half_blocks(6)});
  for (NodeId half : {5, 6}) {
    SbmSpec spec{{half, half}, 0.8, 0.2, 0.0};
    // Resample until the draw has at least one edge of each kind.
    for (std::uint64_t s = seed;; ++s) {
      Graph g = sbm_generate(spec, s);
      const double h = g.num_edges() > 0 ? homophily(g, g.labels()) : 0.0;
      if (h > 0.0 && h < 1.0) {
        LabelVector y = g.labels();
        out.push_back({"sbm-2x" + std::to_string(half), std::move(g), std::move(y)});
        break;
      }
    }
  }
  return out;
}

}  // namespace autossl
