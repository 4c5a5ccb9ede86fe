#pragma once

#include <chrono>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "autossl/cluster.hpp"
#include "autossl/search_es.hpp"
#include "autossl/trajectory.hpp"
#include "autossl/training.hpp"

namespace autossl {

struct DsConfig {
  int epochs = 1000;
  double inner_lr = 1e-3;   // epsilon
  double outer_lr = 0.05;   // eta
  KMeansOptions cluster{5, 100, 3};
  double two_sigma_sq = 1e-3;
  int eval_interval = 20;
  int centroid_refresh = 1;  // recompute centroids every this many iterations
  double initial_weight = 0.5;
  Index hidden = 512;
  std::uint64_t seed = 0;
  EvalOptions eval;
};

// One-step meta-gradient: g_i = -eps * <grad_theta H(theta_{t+1}), grad_theta l_i(theta_t)>.
inline Vector meta_gradient(const std::vector<Vector>& per_task_grads, const Vector& homophily_grad, double eps) {
  Vector g(static_cast<Index>(per_task_grads.size()));
  for (std::size_t i = 0; i < per_task_grads.size(); ++i) {
    if (per_task_grads[i].size() != homophily_grad.size()) {
      throw DimensionError("meta_gradient: task " + std::to_string(i) + " gradient has " +
                           std::to_string(per_task_grads[i].size()) + " entries, homophily gradient has " +
                           std::to_string(homophily_grad.size()));
    }
    g(static_cast<Index>(i)) = -eps * homophily_grad.dot(per_task_grads[i]);
  }
  return g;
}

struct DsStepRecord {
  int iteration = 0;
  TaskWeights lambda;  // after the outer update and clip
  double loss = 0.0;   // combined task loss at theta_t
  std::vector<double> per_task_losses;
  double homophily_loss = 0.0;  // H at theta_{t+1}
  double pseudo_homophily = std::numeric_limits<double>::quiet_NaN();
  Vector meta_gradient;
};

struct DsState {
  Model model;
  TaskWeights weights;
  AdamState weight_adam;
  DenseMatrix centroids;
  int iteration = 0;
  RngStream rng;
};

inline DsState init_ds(const Trainer& trainer, const DsConfig& cfg) {
  const RngStream root(cfg.seed);
  RngStream init_rng = root.derive("init");
  DsState s;
  s.model = init_model(trainer.graph(), trainer.tasks(), cfg.hidden, cfg.inner_lr, init_rng);
  s.weights.assign(trainer.tasks().size(), cfg.initial_weight);
  s.weight_adam = AdamState(cfg.outer_lr);
  s.rng = root.derive("train");
  return s;
}

// One iteration: inner Adam step on sum lambda_i l_i, k-means on the new
// embeddings, H and its gradient at theta_{t+1}, meta-gradient, outer Adam
// step on lambda, clip to [0, 1].
inline DsStepRecord ds_step(const Trainer& trainer, DsState& state, const DsConfig& cfg) {
  const TaskSet& tasks = trainer.tasks();
  if (state.weights.size() != tasks.size()) throw DimensionError("ds_step: weight count");
  DsStepRecord rec;
  rec.iteration = ++state.iteration;

  // per-task gradients at theta_t
  const ForwardPass f = trainer.forward(state.model, state.rng, tasks.any_uses_corruption());
  const CombinedLoss loss = combined_loss(tasks, state.weights, f.z, f.draw ? &f.z_corrupt : nullptr,
                                          f.draw ? &*f.draw : nullptr, state.model.heads, false);
  rec.loss = loss.total;
  rec.per_task_losses = loss.per_task;
  std::vector<Vector> task_grads;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    task_grads.push_back(
        trainer.backward(f, state.model, loss.outputs[i].grad_z, loss.outputs[i].grad_z_corrupt).flatten());
  }
  const EncoderGrad combined = trainer.backward(f, state.model, loss.grad_z, loss.grad_z_corrupt);
  apply_encoder_grad(state.model.encoder, combined);
  Trainer::apply_head_grads(state.model, loss.grad_heads);

  // homophily loss at theta_{t+1}
  EncoderCache cache;
  const Embeddings z_next = trainer.graph_encoder().forward(state.model.encoder, &cache);
  if (!z_next.allFinite()) throw NumericError("ds_step: non-finite embeddings at iteration " + std::to_string(rec.iteration));
  const int refresh = std::max(1, cfg.centroid_refresh);
  if (state.centroids.size() == 0 || (rec.iteration - 1) % refresh == 0) {
    const std::uint64_t km_seed =
        RngStream(cfg.seed).derive("kmeans").derive(static_cast<std::uint64_t>(rec.iteration)).next_u64();
    state.centroids = kmeans(z_next, cfg.cluster.k, km_seed, cfg.cluster.max_iter, cfg.cluster.restarts).centroids;
  }
  const HomophilyLossEval h = homophily_loss_grad_embeddings(trainer.graph(), z_next, state.centroids, cfg.two_sigma_sq);
  if (!std::isfinite(h.value)) {
    throw NumericError("ds_step: homophily loss is not finite at iteration " + std::to_string(rec.iteration));
  }
  rec.homophily_loss = h.value;
  const Vector h_grad = encode_backward_cached(cache, state.model.encoder, h.grad_embeddings).flatten();

  rec.meta_gradient = meta_gradient(task_grads, h_grad, cfg.inner_lr);
  Vector lambda = Eigen::Map<const Vector>(state.weights.data(), static_cast<Index>(state.weights.size()));
  adam_step(lambda, rec.meta_gradient, state.weight_adam, "task_weights");
  state.weights = clip_weights(TaskWeights(lambda.data(), lambda.data() + lambda.size()));
  rec.lambda = state.weights;
  return rec;
}

struct DsResult {
  std::vector<TrajectoryRow> trajectory;
  std::vector<DsStepRecord> records;
  int best_iteration = 0;
  double best_pseudo_homophily = -std::numeric_limits<double>::infinity();
  TaskWeights best_weights;
  TaskWeights final_weights;
  Model best_model;
  double best_nmi = std::numeric_limits<double>::quiet_NaN();
  double best_acc = std::numeric_limits<double>::quiet_NaN();
  double train_ms = 0.0;
  double eval_ms = 0.0;
  double total_ms = 0.0;
};

// AutoSSL-DS. Pseudo-homophily is measured at iteration 1, every
// eval_interval iterations and at the last one; the returned checkpoint is the
// measured iterate with the highest value (earliest on ties).
inline DsResult run_ds(const Trainer& trainer, const DsConfig& cfg,
                       const std::function<void(const TrajectoryRow&)>& on_row = {}) {
  if (cfg.epochs < 1) throw ConfigError("DS: epochs must be >= 1");
  if (!(cfg.inner_lr > 0.0) || !(cfg.outer_lr > 0.0)) throw ConfigError("DS: learning rates must be positive");
  const auto start = std::chrono::steady_clock::now();
  DsState state = init_ds(trainer, cfg);
  const std::uint64_t ph_seed = RngStream(cfg.seed).derive("pseudo_homophily").next_u64();
  const int interval = std::max(1, cfg.eval_interval);
  DsResult out;
  for (int t = 1; t <= cfg.epochs; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    DsStepRecord rec = ds_step(trainer, state, cfg);
    const double step_ms = detail::elapsed_ms(t0);
    out.train_ms += step_ms;
    TrajectoryRow row;
    row.iter = rec.iteration;
    row.lambda = rec.lambda;
    row.objective = rec.homophily_loss;
    if (t == 1 || t % interval == 0 || t == cfg.epochs) {
      const auto t1 = std::chrono::steady_clock::now();
      const Embeddings z = trainer.embed(state.model);
      rec.pseudo_homophily =
          pseudo_homophily(trainer.graph(), z, cfg.cluster.k, ph_seed, cfg.cluster.max_iter, cfg.cluster.restarts);
      row.pseudo_homophily = rec.pseudo_homophily;
      evaluate_downstream(trainer.graph(), z, cfg.eval, cfg.seed, row.nmi, row.acc);
      if (rec.pseudo_homophily > out.best_pseudo_homophily) {
        out.best_pseudo_homophily = rec.pseudo_homophily;
        out.best_iteration = t;
        out.best_weights = state.weights;
        out.best_model = state.model;
        out.best_nmi = row.nmi;
        out.best_acc = row.acc;
      }
      out.eval_ms += detail::elapsed_ms(t1);
    }
    row.ms = detail::elapsed_ms(t0);
    if (on_row) on_row(row);
    out.trajectory.push_back(std::move(row));
    out.records.push_back(std::move(rec));
  }
  out.final_weights = state.weights;
  out.total_ms = detail::elapsed_ms(start);
  return out;
}

}  // namespace autossl
