#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "autossl/autossl.hpp"

namespace testing_util {

using autossl::DenseMatrix;
using autossl::Graph;
using autossl::NodeId;

// Connected random graph: a spanning path plus extra random edges.
inline Graph random_graph(NodeId n, int extra_edges, autossl::Index d, std::uint64_t seed, bool labels = true) {
  autossl::RngStream rng(seed);
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  for (int k = 0; k < extra_edges; ++k) {
    const auto u = static_cast<NodeId>(rng.index(n));
    const auto v = static_cast<NodeId>(rng.index(n));
    if (u != v) e.emplace_back(u, v);
  }
  DenseMatrix x(n, d);
  for (autossl::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  std::optional<autossl::LabelVector> y;
  if (labels) {
    autossl::LabelVector l(static_cast<std::size_t>(n));
    for (NodeId i = 0; i < n; ++i) l[i] = static_cast<int>(i % 2);
    y = l;
  }
  return Graph(n, e, x, y);
}

inline DenseMatrix random_matrix(autossl::Index r, autossl::Index c, std::uint64_t seed, double scale = 1.0) {
  autossl::RngStream rng(seed);
  DenseMatrix m(r, c);
  for (autossl::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("autossl_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace testing_util
