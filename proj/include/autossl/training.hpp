#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autossl/encoder.hpp"
#include "autossl/tasks.hpp"

namespace autossl {

// Task weights lambda, one per task in a TaskSet, each in [0, 1].
using TaskWeights = std::vector<double>;

inline TaskWeights clip_weights(TaskWeights w) {
  for (double& x : w) x = std::clamp(std::isnan(x) ? 0.0 : x, 0.0, 1.0);
  return w;
}

inline TaskWeights one_hot_weights(std::size_t n, std::size_t index) {
  TaskWeights w(n, 0.0);
  w.at(index) = 1.0;
  return w;
}

// Encoder plus one head per task, with their optimizer states.
struct Model {
  EncoderState encoder;
  std::vector<HeadParams> heads;
  std::vector<std::vector<AdamState>> head_adam;
};

inline Model init_model(const Graph& graph, const TaskSet& tasks, Index hidden, double learning_rate, RngStream& rng) {
  Model m;
  m.encoder = init_encoder(graph.feature_dim(), hidden, rng, learning_rate);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    // per-task streams keep a head's init independent of which other tasks are present
    RngStream head_rng = rng.derive(tasks[i].name());
    m.heads.push_back(tasks[i].init_head(hidden, head_rng));
    m.head_adam.emplace_back(m.heads.back().blocks.size(), AdamState(learning_rate));
  }
  return m;
}

struct CombinedLoss {
  double total = 0.0;
  std::vector<double> per_task;  // NaN for tasks skipped at zero weight
  DenseMatrix grad_z;
  DenseMatrix grad_z_corrupt;    // empty when no task reads the corrupted view
  std::vector<std::vector<DenseMatrix>> grad_heads;  // already scaled by lambda_i
  std::vector<TaskOutput> outputs;  // unscaled per-task results, empty entries when skipped
};

// L = sum_i lambda_i l_i with its gradients. Pure given the corruption draw.
// With skip_zero_weight, tasks whose weight is exactly 0 are not evaluated.
inline CombinedLoss combined_loss(const TaskSet& tasks, std::span<const double> weights, const Embeddings& z,
                                  const Embeddings* z_corrupt, const CorruptionDraw* draw,
                                  const std::vector<HeadParams>& heads, bool skip_zero_weight = false) {
  if (weights.size() != tasks.size()) {
    throw DimensionError("combined_loss: " + std::to_string(weights.size()) + " weights for " +
                         std::to_string(tasks.size()) + " tasks");
  }
  CombinedLoss out;
  out.per_task.assign(tasks.size(), std::numeric_limits<double>::quiet_NaN());
  out.grad_z = DenseMatrix::Zero(z.rows(), z.cols());
  out.grad_heads.resize(tasks.size());
  out.outputs.resize(tasks.size());
  const TaskInput in{z, z_corrupt, draw};
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const double lambda = weights[i];
    if (skip_zero_weight && lambda == 0.0) {
      for (const auto& b : heads[i].blocks) out.grad_heads[i].push_back(DenseMatrix::Zero(b.rows(), b.cols()));
      continue;
    }
    TaskOutput t = tasks[i].loss_and_grad(in, heads[i]);
    out.per_task[i] = t.loss;
    out.total += lambda * t.loss;
    out.grad_z += lambda * t.grad_z;
    if (t.grad_z_corrupt.size() > 0) {
      if (out.grad_z_corrupt.size() == 0) out.grad_z_corrupt = DenseMatrix::Zero(z.rows(), z.cols());
      out.grad_z_corrupt += lambda * t.grad_z_corrupt;
    }
    for (const auto& g : t.grad_head) out.grad_heads[i].push_back(lambda * g);
    out.outputs[i] = std::move(t);
  }
  return out;
}

struct TrainOptions {
  Index hidden = 512;
  double learning_rate = 1e-3;
};

// Encoder forward pass for the clean graph and, when needed, its corrupted view.
struct ForwardPass {
  Embeddings z;
  EncoderCache cache;
  std::optional<CorruptionDraw> draw;
  Embeddings z_corrupt;
  EncoderCache cache_corrupt;
};

// Drives training of a Model on one graph and task set.
class Trainer {
 public:
  Trainer(const Graph& graph, const TaskSet& tasks) : encoder_(graph), tasks_(&tasks) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (const auto* dgi = dynamic_cast<const DgiTask*>(&tasks[i])) dgi_samples_ = dgi->samples();
    }
  }

  const Graph& graph() const { return encoder_.graph(); }
  const TaskSet& tasks() const { return *tasks_; }
  const GraphEncoder& graph_encoder() const { return encoder_; }

  Embeddings embed(const Model& m) const { return encoder_.forward(m.encoder); }

  bool needs_corruption(std::span<const double> weights, bool skip_zero_weight) const {
    for (std::size_t i = 0; i < tasks_->size(); ++i) {
      if ((*tasks_)[i].uses_corruption() && (!skip_zero_weight || weights[i] != 0.0)) return true;
    }
    return false;
  }

  // The corruption draw consumes `rng` only when a corruption-reading task is active.
  ForwardPass forward(const Model& m, RngStream& rng, bool with_corruption) const {
    ForwardPass f;
    f.z = encoder_.forward(m.encoder, &f.cache);
    if (with_corruption) {
      f.draw = draw_corruption(graph().num_nodes(), dgi_samples_, rng);
      f.z_corrupt = encoder_.forward_permuted(m.encoder, f.draw->permutation, &f.cache_corrupt);
    }
    return f;
  }

  EncoderGrad backward(const ForwardPass& f, const Model& m, const DenseMatrix& grad_z,
                       const DenseMatrix& grad_z_corrupt) const {
    EncoderGrad g = encode_backward_cached(f.cache, m.encoder, grad_z);
    if (grad_z_corrupt.size() > 0 && f.draw) g += encode_backward_cached(f.cache_corrupt, m.encoder, grad_z_corrupt);
    return g;
  }

  static void apply_head_grads(Model& m, const std::vector<std::vector<DenseMatrix>>& grads) {
    for (std::size_t i = 0; i < m.heads.size(); ++i) {
      for (std::size_t b = 0; b < m.heads[i].blocks.size(); ++b) {
        adam_step(m.heads[i].blocks[b], grads[i][b], m.head_adam[i][b], "head");
      }
    }
  }

  // One Adam step on sum_i lambda_i l_i. Returns the combined loss record.
  CombinedLoss step(Model& m, std::span<const double> weights, RngStream& rng) const {
    const ForwardPass f = forward(m, rng, needs_corruption(weights, true));
    CombinedLoss loss = combined_loss(*tasks_, weights, f.z, f.draw ? &f.z_corrupt : nullptr,
                                      f.draw ? &*f.draw : nullptr, m.heads, true);
    if (!std::isfinite(loss.total)) throw NumericError("combined loss is not finite");
    const EncoderGrad g = backward(f, m, loss.grad_z, loss.grad_z_corrupt);
    apply_encoder_grad(m.encoder, g);
    apply_head_grads(m, loss.grad_heads);
    return loss;
  }

 private:
  GraphEncoder encoder_;
  const TaskSet* tasks_;
  NodeId dgi_samples_ = 2000;
};

}  // namespace autossl
