#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "autossl/cli/config.hpp"
#include "autossl/graph_io.hpp"
#include "autossl/search_ds.hpp"
#include "autossl/search_es.hpp"
#include "autossl/theory.hpp"

namespace autossl::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kRuntimeError = 3 };

inline json real_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json lambda_json(const std::vector<std::string>& names, const TaskWeights& w) {
  json j = json::object();
  for (std::size_t i = 0; i < names.size() && i < w.size(); ++i) j[names[i]] = w[i];
  return j;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

struct InputGraph {
  Graph graph;
  std::string source;
  std::vector<std::string> warnings;
  std::optional<Split> split;
};

inline InputGraph load_input_graph(const Settings& s) {
  std::vector<std::string> warnings;
  if (s.graph_path) {
    LoadReport report;
    Graph g = load_graph(*s.graph_path, &report);
    std::optional<Split> split = load_split(*s.graph_path, g.num_nodes());
    return InputGraph{std::move(g), s.graph_path->string(), std::move(report.warnings), std::move(split)};
  }
  Graph g = sbm_generate(s.sbm, s.sbm_seed, &warnings);
  return InputGraph{std::move(g), "sbm", std::move(warnings), std::nullopt};
}

inline json graph_json(const InputGraph& in) {
  const Graph& g = in.graph;
  json j{{"source", in.source},
         {"num_nodes", g.num_nodes()},
         {"num_edges", g.num_edges()},
         {"feature_dim", g.feature_dim()},
         {"max_degree", g.max_degree()}};
  if (g.has_labels()) {
    j["num_classes"] = g.num_classes();
    j["homophily"] = g.num_edges() > 0 ? json(homophily(g, g.labels())) : json(nullptr);
  }
  j["warnings"] = in.warnings;
  return j;
}

namespace detail {

inline EvalOptions eval_options(const Settings& s, const InputGraph& in) {
  EvalOptions e = s.eval;
  // same derivation as resolve_split, so split_seed == seed reproduces the default
  e.split = in.split ? *in.split
                     : random_split(in.graph.num_nodes(), RngStream(s.split_seed).derive("split").next_u64());
  return e;
}

struct FinalMetrics {
  double nmi = std::numeric_limits<double>::quiet_NaN();
  double acc = std::numeric_limits<double>::quiet_NaN();
};

// Summary metrics on the returned model are always computed when labels exist.
inline FinalMetrics final_metrics(const Graph& g, const Embeddings& z, const Settings& s, const EvalOptions& e) {
  FinalMetrics m;
  EvalOptions all = e;
  all.nmi = true;
  all.acc = true;
  evaluate_downstream(g, z, all, s.seed, m.nmi, m.acc);
  return m;
}

inline std::uint64_t ph_seed(std::uint64_t seed) { return RngStream(seed).derive("pseudo_homophily").next_u64(); }

inline std::string require_task(const std::optional<std::string>& t, const char* what) {
  if (!t) throw ConfigError(std::string("config field '") + what + "' is required");
  const auto& known = all_task_names();
  if (std::find(known.begin(), known.end(), *t) == known.end()) throw ConfigError("unknown task '" + *t + "'");
  return *t;
}

}  // namespace detail

inline json run_search(const Settings& s, const std::filesystem::path& out, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  InputGraph in = load_input_graph(s);
  for (const auto& w : in.warnings) log << "warning: " << w << '\n';
  std::vector<std::string> warnings;
  const TaskSet tasks = make_task_set(in.graph, s.tasks, s.task_options, s.seed, &warnings);
  for (const auto& w : warnings) log << "warning: " << w << '\n';
  const Trainer trainer(in.graph, tasks);
  const EvalOptions ev = detail::eval_options(s, in);
  TrajectoryWriter writer(out / "trajectory.csv", tasks.names());
  const auto on_row = [&](const TrajectoryRow& r) { writer.write(r); };

  json summary{{"command", "search"}, {"algo", s.algo}, {"seed", s.seed}, {"tasks", tasks.names()},
               {"graph", graph_json(in)}};
  Model best;
  if (s.algo == "es") {
    EsConfig cfg = s.es;
    cfg.eval = ev;
    const EsResult r = run_es(trainer, cfg, on_row);
    best = r.best_model;
    summary["best_lambda"] = lambda_json(tasks.names(), r.best_weights);
    summary["best_pseudo_homophily"] = real_or_null(r.best_fitness);
    summary["evaluations"] = r.evaluations;
    json gens = json::array();
    for (const auto& g : r.generations) {
      gens.push_back({{"generation", g.generation},
                      {"mean_fitness", real_or_null(g.mean_fitness)},
                      {"best_fitness", real_or_null(g.best_fitness)},
                      {"best_so_far", real_or_null(g.best_so_far)},
                      {"sigma", g.sigma}});
    }
    summary["generations"] = gens;
    const double n = static_cast<double>(std::max<std::int64_t>(1, r.evaluations));
    summary["timings_ms"] = {{"train_total", r.train_ms},
                             {"eval_total", r.eval_ms},
                             {"train_per_candidate", r.train_ms / n},
                             {"eval_per_candidate", r.eval_ms / n}};
  } else {
    DsConfig cfg = s.ds;
    cfg.eval = ev;
    const DsResult r = run_ds(trainer, cfg, on_row);
    best = r.best_model;
    summary["best_lambda"] = lambda_json(tasks.names(), r.best_weights);
    summary["final_lambda"] = lambda_json(tasks.names(), r.final_weights);
    summary["best_pseudo_homophily"] = real_or_null(r.best_pseudo_homophily);
    summary["best_iteration"] = r.best_iteration;
    summary["iterations"] = cfg.epochs;
    summary["timings_ms"] = {{"train_total", r.train_ms},
                             {"eval_total", r.eval_ms},
                             {"train_per_iteration", r.train_ms / cfg.epochs}};
  }
  const Embeddings z = trainer.embed(best);
  const auto fm = detail::final_metrics(in.graph, z, s, ev);
  summary["final_nmi"] = real_or_null(fm.nmi);
  summary["final_acc"] = real_or_null(fm.acc);
  save_checkpoint(best.encoder, out / "checkpoint.bin");
  summary["checkpoint"] = "checkpoint.bin";
  summary["timings_ms"]["total"] = autossl::detail::elapsed_ms(start);
  write_json(out / "summary.json", summary);
  return summary;
}

inline json run_single(const Settings& s, const std::filesystem::path& out, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const std::string task = detail::require_task(s.single_task, "single.task");
  InputGraph in = load_input_graph(s);
  for (const auto& w : in.warnings) log << "warning: " << w << '\n';
  std::vector<std::string> warnings;
  const TaskSet tasks = make_task_set(in.graph, {task}, s.task_options, s.seed, &warnings);
  for (const auto& w : warnings) log << "warning: " << w << '\n';
  const Trainer trainer(in.graph, tasks);
  const EvalOptions ev = detail::eval_options(s, in);
  const std::uint64_t ph = detail::ph_seed(s.seed);
  TrajectoryWriter writer(out / "trajectory.csv", tasks.names());
  const TaskWeights w{1.0};
  double train_ms = 0.0, eval_ms = 0.0;
  auto last = std::chrono::steady_clock::now();
  const auto on_epoch = [&](int e, const Model& m, const CombinedLoss& l) {
    TrajectoryRow row;
    row.iter = e;
    row.lambda = w;
    row.objective = l.total;
    train_ms += autossl::detail::elapsed_ms(last);
    if (e == 1 || e % s.single_eval_interval == 0 || e == s.single_epochs) {
      const auto t1 = std::chrono::steady_clock::now();
      const Embeddings z = trainer.embed(m);
      row.pseudo_homophily = pseudo_homophily(in.graph, z, s.cluster.k, ph, s.cluster.max_iter, s.cluster.restarts);
      evaluate_downstream(in.graph, z, ev, s.seed, row.nmi, row.acc);
      eval_ms += autossl::detail::elapsed_ms(t1);
    }
    row.ms = autossl::detail::elapsed_ms(last);
    writer.write(row);
    last = std::chrono::steady_clock::now();
  };
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  const Model m = train_model(trainer, w, s.hidden, s.lr, s.single_epochs, s.seed, &final_loss, on_epoch);
  const Embeddings z = trainer.embed(m);
  const double ph_value = pseudo_homophily(in.graph, z, s.cluster.k, ph, s.cluster.max_iter, s.cluster.restarts);
  const auto fm = detail::final_metrics(in.graph, z, s, ev);
  save_checkpoint(m.encoder, out / "checkpoint.bin");
  json summary{{"command", "single"},
               {"task", task},
               {"seed", s.seed},
               {"graph", graph_json(in)},
               {"epochs", s.single_epochs},
               {"final_loss", real_or_null(final_loss)},
               {"best_lambda", lambda_json(tasks.names(), w)},
               {"pseudo_homophily", real_or_null(ph_value)},
               {"best_pseudo_homophily", real_or_null(ph_value)},
               {"final_nmi", real_or_null(fm.nmi)},
               {"final_acc", real_or_null(fm.acc)},
               {"checkpoint", "checkpoint.bin"},
               {"timings_ms", {{"train_total", train_ms}, {"eval_total", eval_ms}, {"total", autossl::detail::elapsed_ms(start)}}}};
  write_json(out / "summary.json", summary);
  return summary;
}

inline std::vector<double> linspace01(int steps) {
  std::vector<double> v(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) v[i] = i == steps - 1 ? 1.0 : static_cast<double>(i) / (steps - 1);
  return v;
}

inline json run_grid2(const Settings& s, const std::filesystem::path& out, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const std::string a = detail::require_task(s.grid_a, "grid2.task_a");
  const std::string b = detail::require_task(s.grid_b, "grid2.task_b");
  if (a == b) throw ConfigError("grid2: task_a and task_b must differ");
  InputGraph in = load_input_graph(s);
  for (const auto& w : in.warnings) log << "warning: " << w << '\n';
  const TaskSet tasks = make_task_set(in.graph, {a, b}, s.task_options, s.seed);
  const Trainer trainer(in.graph, tasks);
  const EvalOptions ev = detail::eval_options(s, in);
  const std::uint64_t ph = detail::ph_seed(s.seed);
  const auto grid = linspace01(s.grid_steps);

  std::ofstream csv(out / "heatmap.csv");
  if (!csv) throw Error("cannot write heatmap.csv");
  csv << "lambda_" << a << ",lambda_" << b << ",pseudo_homophily,nmi,acc,ms\n";
  json cells = json::array();
  double best = -std::numeric_limits<double>::infinity();
  TaskWeights best_w;
  for (double va : grid) {
    for (double vb : grid) {
      const auto t0 = std::chrono::steady_clock::now();
      const TaskWeights w{va, vb};
      double value = -std::numeric_limits<double>::infinity();
      double nmi_v = std::numeric_limits<double>::quiet_NaN(), acc_v = nmi_v;
      try {
        const Model m = train_model(trainer, w, s.hidden, s.lr, s.grid_epochs, s.seed);
        const Embeddings z = trainer.embed(m);
        value = pseudo_homophily(in.graph, z, s.cluster.k, ph, s.cluster.max_iter, s.cluster.restarts);
        evaluate_downstream(in.graph, z, ev, s.seed, nmi_v, acc_v);
      } catch (const NumericError& e) {
        log << "warning: cell (" << va << "," << vb << ") diverged: " << e.what() << '\n';
      }
      const double ms = autossl::detail::elapsed_ms(t0);
      csv << format_real(va) << ',' << format_real(vb) << ',' << format_real(value) << ',' << format_real(nmi_v) << ','
          << format_real(acc_v) << ',' << format_real(std::round(ms * 1000.0) / 1000.0) << '\n';
      csv.flush();
      cells.push_back({{"lambda", {va, vb}}, {"pseudo_homophily", real_or_null(value)}, {"nmi", real_or_null(nmi_v)},
                       {"acc", real_or_null(acc_v)}});
      if (value > best) {
        best = value;
        best_w = w;
      }
    }
  }
  json summary{{"command", "grid2"},
               {"seed", s.seed},
               {"tasks", {a, b}},
               {"steps", s.grid_steps},
               {"epochs", s.grid_epochs},
               {"graph", graph_json(in)},
               {"cells", cells},
               {"best_lambda", best_w.empty() ? json(nullptr) : lambda_json(tasks.names(), best_w)},
               {"best_pseudo_homophily", real_or_null(best)},
               {"timings_ms", {{"total", autossl::detail::elapsed_ms(start)}}}};
  write_json(out / "summary.json", summary);
  return summary;
}

inline json theorem_json(const TheoremReport& r) {
  return json{{"graph", r.graph},
              {"N", r.num_nodes},
              {"h_B", r.h_b},
              {"num_labelings", r.num_labelings},
              {"checked", r.checked},
              {"excluded_not_below", r.excluded_not_below},
              {"excluded_delta", r.excluded_delta},
              {"violations", r.violations},
              {"min_gap", real_or_null(r.min_gap)},
              {"monotonicity_violations", r.monotonicity_violations},
              {"monotone", r.monotone}};
}

// Parses "cycle:8", "path:6", "complete:4" or "sbm:5" (two blocks of 5).
inline TheoryCase parse_theory_graph(const std::string& text, std::uint64_t seed) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("theory graph '" + text + "': expected kind:N");
  const std::string kind = text.substr(0, colon);
  NodeId n = 0;
  try {
    n = std::stoll(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("theory graph '" + text + "': bad size");
  }
  if (kind == "sbm") {
    if (n < 1) throw ConfigError("theory graph '" + text + "': block size must be >= 1");
    SbmSpec spec{{n, n}, 0.8, 0.1, 0.5};
    Graph g = sbm_generate(spec, seed);
    LabelVector y = g.labels();
    return TheoryCase{text, std::move(g), std::move(y)};
  }
  if (n % 2 != 0) throw DomainError("theory graph '" + text + "': N must be even for a balanced split");
  if (n < 2 || n > kTheoremMaxNodes) {
    throw DomainError("theory graph '" + text + "': N must lie in [2, " + std::to_string(kTheoremMaxNodes) + "]");
  }
  if (kind == "cycle") return TheoryCase{text, make_cycle(n), half_blocks(n)};
  if (kind == "path") return TheoryCase{text, make_path(n), half_blocks(n)};
  if (kind == "complete") return TheoryCase{text, make_complete(n), half_blocks(n)};
  throw ConfigError("theory graph '" + text + "': unknown kind '" + kind + "'");
}

inline json run_theory_check(const Settings& s, const std::filesystem::path& out, std::ostream& log) {
  std::vector<TheoryCase> cases;
  if (s.theory_graph_path) {
    Graph g = load_graph(*s.theory_graph_path);
    if (!g.has_labels()) throw ConfigError("theory.graph_path: labels.txt is required");
    LabelVector y = g.labels();
    cases.push_back(TheoryCase{s.theory_graph_path->string(), std::move(g), std::move(y)});
  }
  for (const auto& t : s.theory_graphs) cases.push_back(parse_theory_graph(t, s.seed));
  if (cases.empty()) cases = theory_corpus(s.seed);

  json reports = json::array();
  std::int64_t violations = 0;
  bool monotone = true;
  for (const auto& c : cases) {
    const TheoremReport r = verify_theorem(c.graph, c.truth, c.name);
    violations += r.violations;
    monotone = monotone && r.monotone;
    log << c.name << ": checked " << r.checked << " of " << r.num_labelings << ", violations " << r.violations << '\n';
    reports.push_back(theorem_json(r));
  }
  json report{{"command", "theory-check"},
              {"seed", s.seed},
              {"graphs", reports},
              {"total_violations", violations},
              {"all_monotone", monotone}};
  write_json(out / "report.json", report);
  return report;
}

inline json run_sbm_gen(const Settings& s, const std::filesystem::path& out, std::ostream& log) {
  std::vector<std::string> warnings;
  const Graph g = sbm_generate(s.sbm, s.sbm_seed, &warnings);
  for (const auto& w : warnings) log << "warning: " << w << '\n';
  save_graph(g, out);
  json j{{"command", "sbm-gen"},
         {"seed", s.sbm_seed},
         {"block_sizes", s.sbm.block_sizes},
         {"p_in", s.sbm.p_in},
         {"p_out", s.sbm.p_out},
         {"feature_noise", s.sbm.feature_noise},
         {"num_nodes", g.num_nodes()},
         {"num_edges", g.num_edges()},
         {"homophily", g.num_edges() > 0 ? json(homophily(g, g.labels())) : json(nullptr)}};
  write_json(out / "summary.json", j);
  return j;
}

inline json run_eval(const Settings& s, const std::filesystem::path& out, std::ostream& log) {
  InputGraph in = load_input_graph(s);
  for (const auto& w : in.warnings) log << "warning: " << w << '\n';
  json j{{"command", "eval"}, {"seed", s.seed}, {"graph", graph_json(in)}};
  if (s.checkpoint) {
    if (!std::filesystem::exists(*s.checkpoint)) throw ConfigError("checkpoint '" + s.checkpoint->string() + "' not found");
    const EncoderState enc = load_checkpoint(*s.checkpoint);
    const Embeddings z = encode(in.graph, enc);
    j["pseudo_homophily"] = pseudo_homophily(in.graph, z, s.cluster.k, detail::ph_seed(s.seed), s.cluster.max_iter,
                                             s.cluster.restarts);
    const auto fm = detail::final_metrics(in.graph, z, s, detail::eval_options(s, in));
    j["nmi"] = real_or_null(fm.nmi);
    j["acc"] = real_or_null(fm.acc);
  }
  write_json(out / "eval.json", j);
  return j;
}

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"search", "single", "grid2", "theory-check", "sbm-gen", "eval"};
  return names;
}

// Runs a command and maps failures to exit codes. Configuration problems,
// missing inputs and violated preconditions give 2; anything raised while
// running gives 3.
inline int run_command(const std::string& command, const json& doc, std::uint64_t seed,
                       const std::filesystem::path& out, std::ostream& log = std::cerr) {
  Settings s;
  try {
    s = parse_settings(doc, seed);
    std::filesystem::create_directories(out);
  } catch (const Error& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  try {
    if (command == "search") {
      run_search(s, out, log);
    } else if (command == "single") {
      run_single(s, out, log);
    } else if (command == "grid2") {
      run_grid2(s, out, log);
    } else if (command == "theory-check") {
      run_theory_check(s, out, log);
    } else if (command == "sbm-gen") {
      run_sbm_gen(s, out, log);
    } else if (command == "eval") {
      run_eval(s, out, log);
    } else {
      log << "config error: unknown command '" << command << "'\n";
      return kConfigError;
    }
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IngestionError& e) {
    log << "input error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    log << "precondition failed: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace autossl::cli
