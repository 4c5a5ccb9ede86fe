#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "autossl/cluster.hpp"
#include "autossl/graph.hpp"
#include "autossl/search_ds.hpp"
#include "autossl/search_es.hpp"
#include "autossl/tasks.hpp"

namespace autossl::cli {

using nlohmann::json;

// Every recognized configuration key with its default. Unknown keys are rejected.
inline json default_config() {
  return json::parse(R"({
    "graph": {
      "path": null,
      "sbm": {"block_sizes": [100, 100, 100], "p_in": 0.1, "p_out": 0.01, "feature_noise": 1.0, "seed": null}
    },
    "tasks": ["Clu", "Par", "PairSim", "PairDis", "Dgi"],
    "task_options": {"clu_parts": 10, "par_clusters": 10, "pairsim_pairs": 4000, "pairdis_pairs": 4000,
                     "pairdis_cap": 4, "dgi_samples": 2000},
    "encoder": {"hidden": 512, "lr": 0.001},
    "cluster": {"k": 5, "max_iter": 100, "restarts": 3, "two_sigma_sq": 0.001},
    "eval": {"nmi": true, "acc": true, "l2": 0.0001, "split_seed": null},
    "algo": "es",
    "es": {"population": 8, "rounds": 40, "epochs": 1000, "sigma0": 0.3, "initial_mean": 0.5, "workers": 1},
    "ds": {"epochs": 1000, "outer_lr": 0.05, "eval_interval": 20, "centroid_refresh": 1, "initial_weight": 0.5},
    "single": {"task": null, "epochs": 1000, "eval_interval": 20},
    "grid2": {"task_a": null, "task_b": null, "steps": 5, "epochs": 1000},
    "theory": {"graphs": [], "graph_path": null},
    "checkpoint": null
  })");
}

namespace detail {

inline void merge_into(json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) throw ConfigError(where.empty() ? "config: top level must be an object" : where + ": expected an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("config: unknown key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object() && it.value().is_object()) {
      merge_into(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

}  // namespace detail

// Applies "a.b.c=value" to the document. The value is parsed as JSON when
// possible and taken as a string otherwise.
inline void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) throw ConfigError("--set: unknown key '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

inline json load_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides) {
  json doc = default_config();
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot open config file '" + file->string() + "'");
    json user;
    try {
      user = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file '" + file->string() + "': " + e.what());
    }
    detail::merge_into(doc, user, "");
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return doc;
}

// Typed view of a configuration document.
struct Settings {
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> graph_path;
  SbmSpec sbm;
  std::uint64_t sbm_seed = 0;
  std::vector<std::string> tasks;
  TaskOptions task_options;
  Index hidden = 512;
  double lr = 1e-3;
  KMeansOptions cluster;
  double two_sigma_sq = 1e-3;
  EvalOptions eval;
  std::uint64_t split_seed = 0;
  std::string algo = "es";
  EsConfig es;
  DsConfig ds;
  std::optional<std::string> single_task;
  int single_epochs = 1000;
  int single_eval_interval = 20;
  std::optional<std::string> grid_a, grid_b;
  int grid_steps = 5;
  int grid_epochs = 1000;
  std::vector<std::string> theory_graphs;
  std::optional<std::filesystem::path> theory_graph_path;
  std::optional<std::filesystem::path> checkpoint;
};

namespace detail {

template <typename T>
T field(const json& doc, const std::string& path) {
  const json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    node = &node->at(path.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  try {
    return node->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + path + "': wrong type (" + node->dump() + ")");
  }
}

template <typename T>
std::optional<T> optional_field(const json& doc, const std::string& path) {
  const json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    node = &node->at(path.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_null()) return std::nullopt;
  return field<T>(doc, path);
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("config field " + what);
}

}  // namespace detail

inline Settings parse_settings(const json& doc, std::uint64_t seed) {
  using detail::field;
  using detail::optional_field;
  using detail::require;
  Settings s;
  s.seed = seed;
  if (auto p = optional_field<std::string>(doc, "graph.path")) s.graph_path = *p;
  s.sbm.block_sizes = field<std::vector<NodeId>>(doc, "graph.sbm.block_sizes");
  s.sbm.p_in = field<double>(doc, "graph.sbm.p_in");
  s.sbm.p_out = field<double>(doc, "graph.sbm.p_out");
  s.sbm.feature_noise = field<double>(doc, "graph.sbm.feature_noise");
  s.sbm_seed = optional_field<std::uint64_t>(doc, "graph.sbm.seed").value_or(seed);

  s.tasks = field<std::vector<std::string>>(doc, "tasks");
  require(!s.tasks.empty(), "'tasks': at least one task is required");
  for (const auto& t : s.tasks) {
    const auto& known = all_task_names();
    if (std::find(known.begin(), known.end(), t) == known.end()) throw ConfigError("unknown task '" + t + "'");
  }
  s.task_options.clu_parts = field<NodeId>(doc, "task_options.clu_parts");
  s.task_options.par_clusters = field<Index>(doc, "task_options.par_clusters");
  s.task_options.pairsim_pairs = field<std::int64_t>(doc, "task_options.pairsim_pairs");
  s.task_options.pairdis_pairs = field<std::int64_t>(doc, "task_options.pairdis_pairs");
  s.task_options.pairdis_cap = field<int>(doc, "task_options.pairdis_cap");
  s.task_options.dgi_samples = field<NodeId>(doc, "task_options.dgi_samples");

  s.hidden = field<Index>(doc, "encoder.hidden");
  s.lr = field<double>(doc, "encoder.lr");
  require(s.hidden > 0, "'encoder.hidden' must be positive");
  require(s.lr > 0, "'encoder.lr' must be positive");

  s.cluster.k = field<Index>(doc, "cluster.k");
  s.cluster.max_iter = field<int>(doc, "cluster.max_iter");
  s.cluster.restarts = field<int>(doc, "cluster.restarts");
  s.two_sigma_sq = field<double>(doc, "cluster.two_sigma_sq");
  require(s.cluster.k >= 2, "'cluster.k' must be >= 2");
  require(s.two_sigma_sq > 0, "'cluster.two_sigma_sq' must be positive");

  s.eval.nmi = field<bool>(doc, "eval.nmi");
  s.eval.acc = field<bool>(doc, "eval.acc");
  s.eval.l2 = field<double>(doc, "eval.l2");
  s.split_seed = optional_field<std::uint64_t>(doc, "eval.split_seed").value_or(seed);

  s.algo = field<std::string>(doc, "algo");
  require(s.algo == "es" || s.algo == "ds", "'algo' must be \"es\" or \"ds\"");

  s.es.population = field<int>(doc, "es.population");
  s.es.rounds = field<int>(doc, "es.rounds");
  s.es.epochs = field<int>(doc, "es.epochs");
  s.es.sigma0 = field<double>(doc, "es.sigma0");
  s.es.initial_mean = field<double>(doc, "es.initial_mean");
  s.es.workers = field<int>(doc, "es.workers");
  require(s.es.population >= 2, "'es.population' must be >= 2");
  require(s.es.rounds >= 1, "'es.rounds' must be >= 1");
  require(s.es.epochs >= 0, "'es.epochs' must be >= 0");
  require(s.es.sigma0 > 0, "'es.sigma0' must be positive");
  require(s.es.workers >= 1, "'es.workers' must be >= 1");
  s.es.hidden = s.hidden;
  s.es.learning_rate = s.lr;
  s.es.cluster = s.cluster;
  s.es.seed = seed;
  s.es.eval = s.eval;

  s.ds.epochs = field<int>(doc, "ds.epochs");
  s.ds.outer_lr = field<double>(doc, "ds.outer_lr");
  s.ds.eval_interval = field<int>(doc, "ds.eval_interval");
  s.ds.centroid_refresh = field<int>(doc, "ds.centroid_refresh");
  s.ds.initial_weight = field<double>(doc, "ds.initial_weight");
  require(s.ds.epochs >= 1, "'ds.epochs' must be >= 1");
  require(s.ds.outer_lr > 0, "'ds.outer_lr' must be positive");
  require(s.ds.eval_interval >= 1, "'ds.eval_interval' must be >= 1");
  require(s.ds.centroid_refresh >= 1, "'ds.centroid_refresh' must be >= 1");
  require(s.ds.initial_weight >= 0 && s.ds.initial_weight <= 1, "'ds.initial_weight' must lie in [0,1]");
  s.ds.inner_lr = s.lr;
  s.ds.hidden = s.hidden;
  s.ds.cluster = s.cluster;
  s.ds.two_sigma_sq = s.two_sigma_sq;
  s.ds.seed = seed;
  s.ds.eval = s.eval;

  s.single_task = optional_field<std::string>(doc, "single.task");
  s.single_epochs = field<int>(doc, "single.epochs");
  s.single_eval_interval = field<int>(doc, "single.eval_interval");
  require(s.single_epochs >= 0, "'single.epochs' must be >= 0");
  require(s.single_eval_interval >= 1, "'single.eval_interval' must be >= 1");

  s.grid_a = optional_field<std::string>(doc, "grid2.task_a");
  s.grid_b = optional_field<std::string>(doc, "grid2.task_b");
  s.grid_steps = field<int>(doc, "grid2.steps");
  s.grid_epochs = field<int>(doc, "grid2.epochs");
  require(s.grid_steps >= 2, "'grid2.steps' must be >= 2");

  s.theory_graphs = field<std::vector<std::string>>(doc, "theory.graphs");
  if (auto p = optional_field<std::string>(doc, "theory.graph_path")) s.theory_graph_path = *p;
  if (auto p = optional_field<std::string>(doc, "checkpoint")) s.checkpoint = *p;
  return s;
}

}  // namespace autossl::cli
