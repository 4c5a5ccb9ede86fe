#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "autossl/graph.hpp"

namespace autossl {

// On-disk layout of a graph directory:
//   edges.tsv     one edge per line, two whitespace-separated 0-based node ids
//   features.csv  N lines of comma-separated reals; line i is node i
//   labels.txt    optional, N lines with one integer class id each
struct LoadReport {
  EdgeReport edges;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open required file '" + path.string() + "'");
  return in;
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  token = trim(token);
  if (token.empty()) return false;
  if (token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

inline std::string where(const std::filesystem::path& file, std::size_t line) {
  return file.filename().string() + " line " + std::to_string(line);
}

}  // namespace detail

inline DenseMatrix read_features_csv(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = detail::trim(line);
    if (sv.empty()) continue;
    Index count = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = sv.find(',', start);
      const std::string_view tok = sv.substr(start, comma == std::string_view::npos ? sv.npos : comma - start);
      double x = 0.0;
      if (!detail::parse_number(tok, x)) {
        throw MalformedInputError(detail::where(path, lineno) + ": cannot parse feature value '" +
                                  std::string(detail::trim(tok)) + "'");
      }
      values.push_back(x);
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cols < 0) cols = count;
    if (count != cols) {
      throw DimensionError(detail::where(path, lineno) + ": expected " + std::to_string(cols) +
                           " feature columns, found " + std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) throw MalformedInputError(path.filename().string() + ": no feature rows");
  DenseMatrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

inline std::vector<std::pair<NodeId, NodeId>> read_edges_tsv(const std::filesystem::path& path, NodeId num_nodes) {
  auto in = detail::open_input(path);
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = detail::trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    std::istringstream ss{std::string(sv)};
    std::string a, b, extra;
    NodeId u = -1, v = -1;
    if (!(ss >> a >> b) || (ss >> extra) || !detail::parse_number(a, u) || !detail::parse_number(b, v)) {
      throw MalformedInputError(detail::where(path, lineno) + ": expected two integer node ids");
    }
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes) {
      throw MalformedInputError(detail::where(path, lineno) + ": node index out of range [0," +
                                std::to_string(num_nodes) + ")");
    }
    edges.emplace_back(u, v);
  }
  return edges;
}

inline std::vector<NodeId> read_index_list(const std::filesystem::path& path, NodeId num_nodes) {
  auto in = detail::open_input(path);
  std::vector<NodeId> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = detail::trim(line);
    if (sv.empty()) continue;
    NodeId v = -1;
    if (!detail::parse_number(sv, v) || v < 0 || v >= num_nodes) {
      throw MalformedInputError(detail::where(path, lineno) + ": invalid node index");
    }
    out.push_back(v);
  }
  return out;
}

inline LabelVector read_labels_txt(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  LabelVector labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = detail::trim(line);
    if (sv.empty()) continue;
    int y = -1;
    if (!detail::parse_number(sv, y) || y < 0) {
      throw MalformedInputError(detail::where(path, lineno) + ": invalid class label");
    }
    labels.push_back(y);
  }
  return labels;
}

inline Graph load_graph(const std::filesystem::path& dir, LoadReport* report = nullptr) {
  const auto edges_path = dir / "edges.tsv";
  const auto features_path = dir / "features.csv";
  const auto labels_path = dir / "labels.txt";
  if (!std::filesystem::exists(edges_path)) {
    throw IngestionError("missing required file '" + edges_path.string() + "'");
  }
  if (!std::filesystem::exists(features_path)) {
    throw IngestionError("missing required file '" + features_path.string() + "'");
  }
  DenseMatrix features = read_features_csv(features_path);
  const NodeId n = features.rows();
  auto edges = read_edges_tsv(edges_path, n);
  std::optional<LabelVector> labels;
  if (std::filesystem::exists(labels_path)) {
    labels = read_labels_txt(labels_path);
    if (static_cast<NodeId>(labels->size()) != n) {
      throw DimensionError("labels.txt has " + std::to_string(labels->size()) + " rows but features.csv has " +
                           std::to_string(n));
    }
  }
  LoadReport local;
  Graph g(n, std::move(edges), std::move(features), std::move(labels), &local.edges);
  if (local.edges.self_loops > 0) {
    local.warnings.push_back("dropped " + std::to_string(local.edges.self_loops) + " self-loop(s)");
  }
  if (local.edges.duplicates > 0) {
    local.warnings.push_back("merged " + std::to_string(local.edges.duplicates) +
                             " duplicate or reverse-direction edge line(s)");
  }
  if (local.edges.reciprocal_pairs > 0 && local.edges.reciprocal_pairs * 2 >= local.edges.input_edges) {
    local.warnings.push_back("edges.tsv appears to list both directions; counted " +
                             std::to_string(g.num_edges()) + " undirected edges from " +
                             std::to_string(local.edges.input_edges) + " lines");
  }
  if (report) *report = std::move(local);
  return g;
}

inline void save_graph(const Graph& g, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "edges.tsv");
    for (const Edge& e : g.edges()) out << e.u << '\t' << e.v << '\n';
  }
  {
    std::ofstream out(dir / "features.csv");
    out << std::setprecision(17);
    const DenseMatrix& x = g.features();
    for (Index r = 0; r < x.rows(); ++r) {
      for (Index c = 0; c < x.cols(); ++c) {
        if (c) out << ',';
        out << x(r, c);
      }
      out << '\n';
    }
  }
  if (g.has_labels()) {
    std::ofstream out(dir / "labels.txt");
    for (int y : g.labels()) out << y << '\n';
  }
}

}  // namespace autossl
