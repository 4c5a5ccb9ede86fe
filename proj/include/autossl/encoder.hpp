#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>

#include "autossl/graph.hpp"
#include "autossl/numeric.hpp"
#include "autossl/rng.hpp"

namespace autossl {

using Embeddings = DenseMatrix;

// Parameters of the one-layer GCN encoder Z = PReLU(A_hat X W).
struct EncoderState {
  DenseMatrix weight;      // d_in x hidden
  DenseMatrix prelu_slope; // 1 x hidden
  AdamState weight_adam;
  AdamState slope_adam;

  Index input_dim() const { return weight.rows(); }
  Index hidden_dim() const { return weight.cols(); }
  // Number of scalars in the flattened (weight, slope) vector.
  Index num_params() const { return weight.size() + prelu_slope.size(); }
};

struct EncoderGrad {
  DenseMatrix weight;
  DenseMatrix prelu_slope;

  // Flattened as [weight (row-major), slope].
  Vector flatten() const {
    Vector out(weight.size() + prelu_slope.size());
    std::copy(weight.data(), weight.data() + weight.size(), out.data());
    std::copy(prelu_slope.data(), prelu_slope.data() + prelu_slope.size(), out.data() + weight.size());
    return out;
  }

  EncoderGrad& operator+=(const EncoderGrad& o) {
    weight += o.weight;
    prelu_slope += o.prelu_slope;
    return *this;
  }
};

// Glorot-uniform weight, slope 0.25.
inline EncoderState init_encoder(Index input_dim, Index hidden_dim, RngStream& rng, double learning_rate = 1e-3) {
  if (input_dim <= 0 || hidden_dim <= 0) throw ConfigError("encoder: dimensions must be positive");
  EncoderState s;
  const double limit = std::sqrt(6.0 / static_cast<double>(input_dim + hidden_dim));
  s.weight.resize(input_dim, hidden_dim);
  for (Index i = 0; i < s.weight.size(); ++i) s.weight.data()[i] = rng.uniform(-limit, limit);
  s.prelu_slope = DenseMatrix::Constant(1, hidden_dim, 0.25);
  s.weight_adam = AdamState(learning_rate);
  s.slope_adam = AdamState(learning_rate);
  return s;
}

// Forward pass intermediates kept for backward.
struct EncoderCache {
  DenseMatrix input;  // propagated input A_hat X
  DenseMatrix pre;    // A_hat X W
};

inline DenseMatrix prelu(const DenseMatrix& pre, const DenseMatrix& slope) {
  DenseMatrix out = pre;
  for (Index r = 0; r < out.rows(); ++r) {
    for (Index c = 0; c < out.cols(); ++c) {
      if (out(r, c) <= 0.0) out(r, c) *= slope(0, c);
    }
  }
  return out;
}

// Forward from an already propagated input P = A_hat X.
inline Embeddings encode_propagated(const DenseMatrix& propagated, const EncoderState& state,
                                    EncoderCache* cache = nullptr) {
  if (propagated.cols() != state.weight.rows()) {
    throw DimensionError("encode: feature width " + std::to_string(propagated.cols()) +
                         " does not match encoder input dimension " + std::to_string(state.weight.rows()));
  }
  DenseMatrix pre = propagated * state.weight;
  Embeddings z = prelu(pre, state.prelu_slope);
  if (cache) {
    cache->input = propagated;
    cache->pre = std::move(pre);
  }
  return z;
}

inline EncoderGrad encode_backward_cached(const EncoderCache& cache, const EncoderState& state,
                                          const DenseMatrix& grad_embeddings) {
  require_same_shape(cache.pre, grad_embeddings, "encode_backward");
  DenseMatrix grad_pre = grad_embeddings;
  EncoderGrad g;
  g.prelu_slope = DenseMatrix::Zero(1, state.hidden_dim());
  for (Index r = 0; r < grad_pre.rows(); ++r) {
    for (Index c = 0; c < grad_pre.cols(); ++c) {
      const double p = cache.pre(r, c);
      if (p <= 0.0) {
        g.prelu_slope(0, c) += grad_pre(r, c) * p;
        grad_pre(r, c) *= state.prelu_slope(0, c);
      }
    }
  }
  g.weight = cache.input.transpose() * grad_pre;
  return g;
}

// Encoder bound to one graph; caches A_hat X so training steps only pay for the dense product.
class GraphEncoder {
 public:
  explicit GraphEncoder(const Graph& graph)
      : graph_(&graph), propagated_(spmm(graph.normalized_adjacency(), graph.features())) {}

  const Graph& graph() const { return *graph_; }
  const DenseMatrix& propagated_features() const { return propagated_; }

  Embeddings forward(const EncoderState& state, EncoderCache* cache = nullptr) const {
    return encode_propagated(propagated_, state, cache);
  }

  // Encodes the graph with node features row-permuted: row i of X replaced by X[perm[i]].
  Embeddings forward_permuted(const EncoderState& state, std::span<const NodeId> perm,
                              EncoderCache* cache = nullptr) const {
    const DenseMatrix& x = graph_->features();
    if (static_cast<Index>(perm.size()) != x.rows()) throw DimensionError("forward_permuted: permutation length");
    DenseMatrix shuffled(x.rows(), x.cols());
    for (Index i = 0; i < x.rows(); ++i) shuffled.row(i) = x.row(perm[i]);
    return encode_propagated(spmm(graph_->normalized_adjacency(), shuffled), state, cache);
  }

 private:
  const Graph* graph_;
  DenseMatrix propagated_;
};

inline Embeddings encode(const Graph& graph, const EncoderState& state) {
  return encode_propagated(spmm(graph.normalized_adjacency(), graph.features()), state);
}

inline EncoderGrad encode_backward(const Graph& graph, const EncoderState& state, const DenseMatrix& grad_embeddings) {
  EncoderCache cache;
  encode_propagated(spmm(graph.normalized_adjacency(), graph.features()), state, &cache);
  return encode_backward_cached(cache, state, grad_embeddings);
}

inline void apply_encoder_grad(EncoderState& state, const EncoderGrad& grad) {
  adam_step(state.weight, grad.weight, state.weight_adam, "encoder.weight");
  adam_step(state.prelu_slope, grad.prelu_slope, state.slope_adam, "encoder.prelu_slope");
}

// Checkpoint layout (little-endian):
//   8 bytes  magic "ASSLENC1"
//   u64      input_dim, hidden_dim, step_count
//   f64[input_dim*hidden_dim]  weight, row-major
//   f64[hidden_dim]            PReLU slope
inline void save_checkpoint(const EncoderState& state, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write checkpoint '" + path.string() + "'");
  out.write("ASSLENC1", 8);
  const std::uint64_t header[3] = {static_cast<std::uint64_t>(state.input_dim()),
                                   static_cast<std::uint64_t>(state.hidden_dim()),
                                   static_cast<std::uint64_t>(state.weight_adam.step_count)};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(state.weight.data()),
            static_cast<std::streamsize>(state.weight.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(state.prelu_slope.data()),
            static_cast<std::streamsize>(state.prelu_slope.size() * sizeof(double)));
}

inline EncoderState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open checkpoint '" + path.string() + "'");
  char magic[8];
  std::uint64_t header[3];
  if (!in.read(magic, 8) || std::memcmp(magic, "ASSLENC1", 8) != 0) {
    throw MalformedInputError("checkpoint '" + path.string() + "': bad magic");
  }
  if (!in.read(reinterpret_cast<char*>(header), sizeof(header)) || header[0] == 0 || header[1] == 0 ||
      header[0] > (1u << 24) || header[1] > (1u << 24)) {
    throw MalformedInputError("checkpoint '" + path.string() + "': bad header");
  }
  EncoderState s;
  s.weight.resize(static_cast<Index>(header[0]), static_cast<Index>(header[1]));
  s.prelu_slope.resize(1, static_cast<Index>(header[1]));
  s.weight_adam.step_count = static_cast<std::int64_t>(header[2]);
  s.slope_adam.step_count = static_cast<std::int64_t>(header[2]);
  in.read(reinterpret_cast<char*>(s.weight.data()), static_cast<std::streamsize>(s.weight.size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(s.prelu_slope.data()),
          static_cast<std::streamsize>(s.prelu_slope.size() * sizeof(double)));
  if (!in) throw MalformedInputError("checkpoint '" + path.string() + "': truncated");
  return s;
}

}  // namespace autossl
