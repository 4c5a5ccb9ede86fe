#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "autossl/cluster.hpp"
#include "autossl/cmaes.hpp"
#include "autossl/eval.hpp"
#include "autossl/trajectory.hpp"
#include "autossl/training.hpp"

namespace autossl {

// Downstream metrics computed alongside a search, when labels exist.
struct EvalOptions {
  bool nmi = false;
  bool acc = false;
  double l2 = 1e-4;
  std::optional<Split> split;  // defaults to a random 10/10/80 split
};

struct EsConfig {
  int population = 8;
  int rounds = 40;
  int epochs = 1000;
  double sigma0 = 0.3;
  double initial_mean = 0.5;
  Index hidden = 512;
  double learning_rate = 1e-3;
  KMeansOptions cluster{5, 100, 3};
  int workers = 1;
  std::uint64_t seed = 0;
  EvalOptions eval;
};

struct CandidateResult {
  TaskWeights weights;
  double fitness = -std::numeric_limits<double>::infinity();
  bool diverged = false;
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  double nmi = std::numeric_limits<double>::quiet_NaN();
  double acc = std::numeric_limits<double>::quiet_NaN();
  double train_ms = 0.0;
  double eval_ms = 0.0;
  Model model;
};

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

inline Split resolve_split(const Graph& g, const EvalOptions& opt, std::uint64_t seed) {
  return opt.split ? *opt.split : random_split(g.num_nodes(), RngStream(seed).derive("split").next_u64());
}

}  // namespace detail

// Trains a fresh model on sum_i lambda_i l_i for `epochs` Adam steps.
// Initialization and per-step draws depend only on `seed`, so equal
// (seed, weights) give equal results.
inline Model train_model(const Trainer& trainer, std::span<const double> weights, Index hidden, double learning_rate,
                         int epochs, std::uint64_t seed, double* final_loss = nullptr,
                         const std::function<void(int, const Model&, const CombinedLoss&)>& on_epoch = {}) {
  const RngStream root(seed);
  RngStream init_rng = root.derive("init");
  RngStream step_rng = root.derive("train");
  Model m = init_model(trainer.graph(), trainer.tasks(), hidden, learning_rate, init_rng);
  double loss = std::numeric_limits<double>::quiet_NaN();
  for (int e = 1; e <= epochs; ++e) {
    const CombinedLoss l = trainer.step(m, weights, step_rng);
    loss = l.total;
    if (on_epoch) on_epoch(e, m, l);
  }
  if (final_loss) *final_loss = loss;
  return m;
}

inline void evaluate_downstream(const Graph& g, const Embeddings& z, const EvalOptions& opt, std::uint64_t seed,
                                double& nmi_out, double& acc_out) {
  if (!g.has_labels()) return;
  if (opt.nmi) nmi_out = cluster_eval(g, z, RngStream(seed).derive("nmi").next_u64());
  if (opt.acc) {
    // A tiny training split can hold a single class; the metric is then
    // missing rather than fatal to the search.
    try {
      acc_out = logistic_probe(z, g.labels(), detail::resolve_split(g, opt, seed), opt.l2);
    } catch (const ConfigError&) {
      acc_out = std::numeric_limits<double>::quiet_NaN();
    }
  }
}

// Trains one candidate from scratch and scores it by pseudo-homophily.
// Divergence (non-finite loss) yields fitness -inf instead of an exception.
inline CandidateResult evaluate_candidate(const Trainer& trainer, const TaskWeights& weights, const EsConfig& cfg) {
  CandidateResult r;
  r.weights = weights;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.model = train_model(trainer, weights, cfg.hidden, cfg.learning_rate, cfg.epochs, cfg.seed, &r.final_loss);
  } catch (const NumericError&) {
    r.diverged = true;
    r.train_ms = detail::elapsed_ms(t0);
    return r;
  }
  r.train_ms = detail::elapsed_ms(t0);
  const auto t1 = std::chrono::steady_clock::now();
  const Embeddings z = trainer.embed(r.model);
  if (!z.allFinite()) {
    r.diverged = true;
    return r;
  }
  const std::uint64_t ph_seed = RngStream(cfg.seed).derive("pseudo_homophily").next_u64();
  r.fitness = pseudo_homophily(trainer.graph(), z, cfg.cluster.k, ph_seed, cfg.cluster.max_iter, cfg.cluster.restarts);
  evaluate_downstream(trainer.graph(), z, cfg.eval, cfg.seed, r.nmi, r.acc);
  r.eval_ms = detail::elapsed_ms(t1);
  return r;
}

struct EsGeneration {
  int generation = 0;
  double mean_fitness = 0.0;
  double best_fitness = 0.0;
  double best_so_far = 0.0;
  double sigma = 0.0;
};

struct EsResult {
  std::vector<TrajectoryRow> trajectory;  // one row per candidate evaluation
  std::vector<EsGeneration> generations;
  TaskWeights best_weights;
  double best_fitness = -std::numeric_limits<double>::infinity();
  double best_nmi = std::numeric_limits<double>::quiet_NaN();
  double best_acc = std::numeric_limits<double>::quiet_NaN();
  Model best_model;
  std::int64_t evaluations = 0;
  double train_ms = 0.0;  // summed candidate training time
  double eval_ms = 0.0;   // summed pseudo-homophily / metric time
  double total_ms = 0.0;
};

inline TaskWeights to_weights(const Eigen::VectorXd& v) { return TaskWeights(v.data(), v.data() + v.size()); }

// Evaluates candidates on `workers` threads; results are stored by candidate index.
inline std::vector<CandidateResult> evaluate_population(const Trainer& trainer, const std::vector<TaskWeights>& cands,
                                                        const EsConfig& cfg) {
  std::vector<CandidateResult> results(cands.size());
  const int workers = std::clamp<int>(cfg.workers, 1, static_cast<int>(cands.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < cands.size(); ++i) results[i] = evaluate_candidate(trainer, cands[i], cfg);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(cands.size());
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cands.size(); i = next++) {
        try {
          results[i] = evaluate_candidate(trainer, cands[i], cfg);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

// AutoSSL-ES: CMA-ES over task weights maximizing pseudo-homophily.
inline EsResult run_es(const Trainer& trainer, const EsConfig& cfg,
                       const std::function<void(const TrajectoryRow&)>& on_row = {}) {
  if (cfg.rounds < 1) throw ConfigError("ES: rounds must be >= 1");
  if (cfg.population < 2) throw ConfigError("ES: population must be >= 2");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = trainer.tasks().size();
  CmaEs es(Eigen::VectorXd::Constant(static_cast<Index>(n), cfg.initial_mean), cfg.sigma0, cfg.population,
           RngStream(cfg.seed).derive("cmaes").next_u64());
  EsResult out;
  for (int r = 0; r < cfg.rounds; ++r) {
    const auto samples = es.ask();
    std::vector<TaskWeights> cands;
    for (const auto& s : samples) cands.push_back(to_weights(s));
    std::vector<CandidateResult> results = evaluate_population(trainer, cands, cfg);
    std::vector<double> fitness;
    EsGeneration gen;
    gen.generation = r;
    gen.best_fitness = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    int finite = 0;
    for (std::size_t j = 0; j < results.size(); ++j) {
      CandidateResult& c = results[j];
      fitness.push_back(c.fitness);
      if (std::isfinite(c.fitness)) {
        sum += c.fitness;
        ++finite;
      }
      gen.best_fitness = std::max(gen.best_fitness, c.fitness);
      TrajectoryRow row;
      row.iter = out.evaluations++;
      row.lambda = c.weights;
      row.objective = c.fitness;
      row.pseudo_homophily = c.fitness;
      row.nmi = c.nmi;
      row.acc = c.acc;
      row.ms = c.train_ms + c.eval_ms;
      out.train_ms += c.train_ms;
      out.eval_ms += c.eval_ms;
      if (on_row) on_row(row);
      out.trajectory.push_back(std::move(row));
      if (c.fitness > out.best_fitness || out.best_weights.empty()) {
        out.best_fitness = c.fitness;
        out.best_weights = c.weights;
        out.best_nmi = c.nmi;
        out.best_acc = c.acc;
        out.best_model = std::move(c.model);
      }
    }
    es.tell(samples, fitness);
    gen.mean_fitness = finite > 0 ? sum / finite : -std::numeric_limits<double>::infinity();
    gen.best_so_far = out.best_fitness;
    gen.sigma = es.sigma();
    out.generations.push_back(gen);
  }
  out.total_ms = detail::elapsed_ms(start);
  return out;
}

}  // namespace autossl
