// Acceptance suite. Prints one PASS / FAIL / SKIP line per criterion and
// exits non-zero when any criterion fails.
//
// Environment:
//   AUTOSSL_DATA_DIR  directory holding real datasets (one subdirectory per
//                     dataset, lower-case name); criteria 4 and 10 skip without it
//   AUTOSSL_SLOW=1    enables criterion 10 (hours of compute)
//   AUTOSSL_ONLY=3,5  runs a subset
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "../unit/helpers.hpp"
#include "../unit/kmeans_oracle.hpp"
#include "autossl/cli/commands.hpp"

using namespace autossl;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  enum Status { kPass, kFail, kSkip } status = kPass;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::kFail, std::move(d)}; }
Outcome skip(std::string d) { return {Outcome::kSkip, std::move(d)}; }

std::string fmt(double x, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << x;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

json read_json(const fs::path& p) { return json::parse(testing_util::read_file(p)); }

std::vector<std::string> read_lines(const fs::path& p) {
  std::vector<std::string> out;
  std::istringstream in(testing_util::read_file(p));
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

// Runs a command in-process; throws with the captured log on a non-zero exit.
void run(const std::string& command, const std::vector<std::string>& sets, std::uint64_t seed, const fs::path& out) {
  std::ostringstream log;
  const json doc = cli::load_config(std::nullopt, sets);
  const int rc = cli::run_command(command, doc, seed, out, log);
  if (rc != 0) throw std::runtime_error(command + " exited " + std::to_string(rc) + ": " + log.str());
}

// ---------------------------------------------------------------- 1

Outcome theorem_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  testing_util::TempDir dir;
  run("theory-check", {}, 7, dir.path());
  const json r = read_json(dir.path() / "report.json");
  std::set<std::string> kinds;
  std::int64_t checked = 0;
  for (const auto& g : r["graphs"]) {
    const std::string name = g["graph"];
    kinds.insert(name.substr(0, name.find('-')));
    checked += g["checked"].get<std::int64_t>();
    if (g["N"].get<std::int64_t>() > 12) return fail(name + " has more than 12 nodes");
    if (!bound_strictly_decreasing(g["N"].get<std::int64_t>())) return fail("bound not decreasing for " + name);
  }
  const double secs = seconds_since(t0);
  const std::string d = std::to_string(r["graphs"].size()) + " graphs (" + std::to_string(kinds.size()) +
                        " families), " + std::to_string(checked) + " labelings checked, " +
                        std::to_string(r["total_violations"].get<std::int64_t>()) + " violations, " + fmt(secs) + " s";
  if (r["graphs"].size() < 5 || kinds.size() < 4) return fail("corpus too small: " + d);
  if (r["total_violations"] != 0) return fail(d);
  if (r["all_monotone"] != true) return fail("bound not monotone in h_A: " + d);
  if (secs >= 120) return fail("too slow: " + d);
  return pass(d);
}

// ---------------------------------------------------------------- 2

const TaskOptions kGradTasks{3, 3, 30, 30, 4, 2000};

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_task = 0, worst_enc = 0, worst_h = 0, worst_meta = 0;
  int checks = 0;
  std::string where;
  auto track = [&](double err, double& worst, const std::string& what) {
    ++checks;
    if (err > worst) {
      worst = err;
      if (err >= 1e-5) where = what;
    }
  };

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const NodeId n = 8 + static_cast<NodeId>(seed);
    const Graph g = testing_util::random_graph(n, 8, 4, 900 + seed);
    const TaskSet tasks = make_task_set(g, all_task_names(), kGradTasks, seed);
    const Trainer trainer(g, tasks);
    RngStream init(seed);
    Model m = init_model(g, tasks, 6, 1e-3, init);
    for (auto& head : m.heads) {
      for (auto& b : head.blocks) b += testing_util::random_matrix(b.rows(), b.cols(), seed + 40, 0.1);
    }
    const std::string tag = " (n=" + std::to_string(n) + ")";

    // each task loss through the encoder: encoder weight, slope and head blocks
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const TaskWeights w = one_hot_weights(tasks.size(), i);
      const bool corrupt = tasks[i].uses_corruption();
      const auto total = [&](const Model& mm) {
        RngStream r(seed + 77);
        const ForwardPass f = trainer.forward(mm, r, corrupt);
        return combined_loss(tasks, w, f.z, f.draw ? &f.z_corrupt : nullptr, f.draw ? &*f.draw : nullptr, mm.heads, true);
      };
      RngStream r(seed + 77);
      const ForwardPass f = trainer.forward(m, r, corrupt);
      const CombinedLoss l = total(m);
      const EncoderGrad eg = trainer.backward(f, m, l.grad_z, l.grad_z_corrupt);
      const std::string name = std::string(tasks[i].name()) + tag;
      track(finite_diff_check(
                [&](const DenseMatrix& x) {
                  Model mm = m;
                  mm.encoder.weight = x;
                  return total(mm).total;
                },
                m.encoder.weight, eg.weight, 1e-5),
            worst_task, name + " encoder weight");
      track(finite_diff_check(
                [&](const DenseMatrix& x) {
                  Model mm = m;
                  mm.encoder.prelu_slope = x;
                  return total(mm).total;
                },
                m.encoder.prelu_slope, eg.prelu_slope, 1e-5),
            worst_task, name + " slope");
      for (std::size_t b = 0; b < m.heads[i].blocks.size(); ++b) {
        track(finite_diff_check(
                  [&](const DenseMatrix& x) {
                    Model mm = m;
                    mm.heads[i].blocks[b] = x;
                    return total(mm).total;
                  },
                  m.heads[i].blocks[b], l.grad_heads[i][b], 1e-5),
              worst_task, name + " head block " + std::to_string(b));
      }
    }

    // encoder backward on its own, against a squared-error upstream
    const DenseMatrix target = testing_util::random_matrix(n, 6, seed + 50);
    const auto sq = [&](const EncoderState& s) { return 0.5 * (encode(g, s) - target).squaredNorm(); };
    const EncoderGrad eg = encode_backward(g, m.encoder, encode(g, m.encoder) - target);
    track(finite_diff_check(
              [&](const DenseMatrix& x) {
                EncoderState s = m.encoder;
                s.weight = x;
                return sq(s);
              },
              m.encoder.weight, eg.weight, 1e-5),
          worst_enc, "encoder weight" + tag);
    track(finite_diff_check(
              [&](const DenseMatrix& x) {
                EncoderState s = m.encoder;
                s.prelu_slope = x;
                return sq(s);
              },
              m.encoder.prelu_slope, eg.prelu_slope, 1e-5),
          worst_enc, "encoder slope" + tag);
  }

  // homophily loss w.r.t. embeddings; instances with exact-zero gradient
  // entries (L1 flat pieces, saturated posteriors) are skipped
  int h_checked = 0;
  for (std::uint64_t seed = 0; seed < 60 && h_checked < 10; ++seed) {
    const Graph g = testing_util::random_graph(8 + static_cast<NodeId>(seed % 5), 6, 1, 1200 + seed);
    const double tau = seed % 2 == 0 ? 0.001 : 0.5;
    const DenseMatrix z = testing_util::random_matrix(g.num_nodes(), 3, 1300 + seed, std::sqrt(tau));
    const DenseMatrix c = kmeans(z, 3, seed).centroids;
    const HomophilyLossEval h = homophily_loss_grad_embeddings(g, z, c, tau);
    if (h.grad_embeddings.cwiseAbs().minCoeff() < 1e-6 * h.grad_embeddings.cwiseAbs().maxCoeff()) continue;
    const auto loss = [&](const DenseMatrix& zz) { return homophily_loss(g, soft_assign(zz, c, tau)).value; };
    // smallest kept entries are ~1e-7; a smaller step lets round-off dominate them
    track(finite_diff_check(loss, z, h.grad_embeddings, 1e-4 * std::sqrt(tau)), worst_h,
          "homophily loss seed " + std::to_string(seed));
    ++h_checked;
  }

  // meta-gradient against central differences of H(theta - eps sum lambda_i grad l_i)
  int meta_checked = 0;
  double meta_fail = 0;
  for (std::uint64_t seed = 0; seed < 40 && meta_checked < 6; ++seed) {
    const NodeId n = 8 + static_cast<NodeId>(seed % 5);
    const Graph g = testing_util::random_graph(n, 8, 4, 1500 + seed);
    const TaskSet tasks = make_task_set(g, all_task_names(), kGradTasks, seed);
    const Trainer trainer(g, tasks);
    RngStream init(seed);
    const Model m = init_model(g, tasks, 4, 1e-3, init);
    RngStream step(seed + 1);
    const ForwardPass f = trainer.forward(m, step, true);
    const std::vector<double> ones(tasks.size(), 1.0);
    const CombinedLoss l = combined_loss(tasks, ones, f.z, &f.z_corrupt, &*f.draw, m.heads, false);
    std::vector<EncoderGrad> grads;
    std::vector<Vector> flat;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      grads.push_back(trainer.backward(f, m, l.outputs[i].grad_z, l.outputs[i].grad_z_corrupt));
      flat.push_back(grads.back().flatten());
    }
    const double eps = 1e-3, tau = 0.5;
    const auto moved = [&](std::span<const double> lam) {
      EncoderState s = m.encoder;
      for (std::size_t i = 0; i < grads.size(); ++i) {
        s.weight -= eps * lam[i] * grads[i].weight;
        s.prelu_slope -= eps * lam[i] * grads[i].prelu_slope;
      }
      return s;
    };
    const std::vector<double> lambda{0.5, 0.3, 0.8, 0.6, 0.4};
    const EncoderState next = moved(lambda);
    EncoderCache cache;
    const Embeddings z = trainer.graph_encoder().forward(next, &cache);
    const DenseMatrix c = kmeans(z, 3, seed).centroids;
    const HomophilyLossEval h = homophily_loss_grad_embeddings(g, z, c, tau);
    const Vector mg = meta_gradient(flat, encode_backward_cached(cache, next, h.grad_embeddings).flatten(), eps);
    if (mg.cwiseAbs().minCoeff() < 1e-6 * mg.cwiseAbs().maxCoeff()) continue;
    const auto phi = [&](const DenseMatrix& lam) {
      const std::vector<double> lv(lam.data(), lam.data() + lam.size());
      return homophily_loss(g, soft_assign(trainer.graph_encoder().forward(moved(lv)), c, tau)).value;
    };
    const DenseMatrix lam = Eigen::Map<const DenseMatrix>(lambda.data(), 1, 5);
    const double err = finite_diff_check(phi, lam, DenseMatrix(mg.transpose()), 1e-4);
    ++checks;
    worst_meta = std::max(worst_meta, err);
    meta_fail = std::max(meta_fail, err);
    ++meta_checked;
  }

  const double secs = seconds_since(t0);
  const std::string d = std::to_string(checks) + " checks; worst rel. error task " + fmt(worst_task, 3) + ", encoder " +
                        fmt(worst_enc, 3) + ", homophily " + fmt(worst_h, 3) + ", meta " + fmt(worst_meta, 3) + ", " +
                        fmt(secs) + " s";
  if (h_checked < 10 || meta_checked < 6) return fail("not enough usable instances: " + d);
  if (std::max({worst_task, worst_enc, worst_h}) >= 1e-5) return fail(d + " at " + where);
  if (meta_fail >= 1e-3) return fail(d);
  if (secs >= 60) return fail("too slow: " + d);
  return pass(d);
}

// ---------------------------------------------------------------- 3

Outcome closed_forms() {
  for (std::int64_t n : {4, 8, 12, 100, 3327}) {
    if (n % 2 != 0) continue;
    if (mi_upper_bound(0.0, n) != std::log(2.0)) return fail("U(0," + std::to_string(n) + ") != ln 2");
    if (mi_upper_bound(static_cast<double>(n) / 4.0, n) != 0.0) return fail("U(N/4," + std::to_string(n) + ") != 0");
  }
  const std::vector<int> a{0, 0, 0, 1}, b{0, 0, 1, 1};
  const double hand = 0.5 * std::log(4.0 / 3.0) + 0.25 * std::log(2.0 / 3.0) + 0.25 * std::log(2.0);
  const double mi = mutual_information_binary(a, b);
  if (std::abs(mi - hand) > 1e-12) return fail("MI " + fmt(mi, 17) + " vs hand " + fmt(hand, 17));
  const std::vector<int> same{0, 1, 1, 0};
  if (std::abs(mutual_information_binary(same, same) - std::log(2.0)) > 1e-12) return fail("MI(A,A) != ln 2");
  const Graph tri(3, {{0, 1}, {1, 2}, {0, 2}}, DenseMatrix::Ones(3, 1), LabelVector{0, 0, 1});
  if (homophily(tri, tri.labels()) != 1.0 / 3.0) return fail("triangle homophily " + fmt(homophily(tri, tri.labels()), 17));
  return pass("U(0,N)=ln 2 and U(N/4,N)=0 exact; MI within " + fmt(std::abs(mi - hand), 2) +
              " of hand value; triangle homophily = 1/3");
}

// ---------------------------------------------------------------- 4

std::optional<fs::path> data_dir() {
  const char* d = std::getenv("AUTOSSL_DATA_DIR");
  if (!d || !*d || !fs::is_directory(d)) return std::nullopt;
  return fs::path(d);
}

Outcome dataset_homophily() {
  const auto root = data_dir();
  if (!root) return skip("AUTOSSL_DATA_DIR not set");
  const std::vector<std::pair<std::string, double>> table{
      {"wikics", 0.70}, {"cs", 0.81},       {"physics", 0.93}, {"computers", 0.78},
      {"photo", 0.83},  {"corafull", 0.57}, {"citeseer", 0.74}, {"ogbn-arxiv", 0.78}};
  std::string d;
  int found = 0;
  bool ok = true;
  for (const auto& [name, expected] : table) {
    const fs::path p = *root / name;
    if (!fs::is_directory(p)) continue;
    ++found;
    const auto t0 = std::chrono::steady_clock::now();
    testing_util::TempDir out;
    run("eval", {"graph.path=" + json(p.string()).dump()}, 0, out.path());
    const double h = read_json(out.path() / "eval.json")["graph"]["homophily"];
    const bool hit = std::abs(h - expected) <= 0.01;
    ok = ok && hit;
    d += name + " " + fmt(h, 3) + " (expected " + fmt(expected, 2) + (hit ? "" : ", MISS") + ", " +
         fmt(seconds_since(t0), 3) + " s); ";
  }
  if (found == 0) return skip("no known dataset under " + root->string());
  return ok ? pass(d) : fail(d);
}

// ---------------------------------------------------------------- 5

Outcome kmeans_oracle() {
  const auto corpus = testing_util::small_kmeans_corpus();
  double worst = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const DenseMatrix& x = corpus[i];
    if (x.rows() > 8) continue;
    const double got = kmeans(x, 2, 1000 + i).inertia;
    const double best = testing_util::exhaustive_two_means(x);
    worst = std::max(worst, std::abs(got - best));
    if (std::abs(got - best) > 1e-9) {
      return fail("instance " + std::to_string(i) + ": inertia " + fmt(got, 12) + " vs optimum " + fmt(best, 12));
    }
  }
  return pass(std::to_string(corpus.size()) + " instances, max |inertia - optimum| = " + fmt(worst, 3));
}

// ---------------------------------------------------------------- 6

Outcome cmaes_sphere() {
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::VectorXd c = (Eigen::VectorXd(5) << 0.2, 0.4, 0.6, 0.8, 0.3).finished();
  const auto optimize = [&](std::uint64_t seed, Eigen::VectorXd& mean) {
    CmaEs es(Eigen::VectorXd::Constant(5, 0.5), 0.3, 8, seed);
    double best = INFINITY;
    for (int g = 0; g < 200; ++g) {
      const auto cands = es.ask();
      std::vector<double> fit;
      for (const auto& x : cands) {
        best = std::min(best, (x - c).squaredNorm());
        fit.push_back(-(x - c).squaredNorm());
      }
      es.tell(cands, fit);
    }
    mean = es.mean();
    return best;
  };
  Eigen::VectorXd m1, m2;
  const double e1 = optimize(2024, m1);
  const double e2 = optimize(2024, m2);
  const double secs = seconds_since(t0);
  const std::string d = "best error " + fmt(e1, 3) + " after 200 generations, " + fmt(secs) + " s";
  if (e1 != e2 || m1 != m2) return fail("not seed-deterministic: " + d);
  if (!(e1 < 1e-4)) return fail(d);
  if (secs >= 30) return fail("too slow: " + d);
  return pass(d + ", rerun identical");
}

// ---------------------------------------------------------------- 7, 8

// Desk-scale SBM shared by the end-to-end checks. Pseudo-homophily uses k = 3,
// the block count; with the default k = 5 it barely tracks NMI on 3-d features.
std::vector<std::string> desk_sbm(std::vector<std::string> extra) {
  std::vector<std::string> sets{"graph.sbm.block_sizes=[100,100,100]", "graph.sbm.p_in=0.1", "graph.sbm.p_out=0.01",
                                "graph.sbm.feature_noise=1.0", "encoder.hidden=64", "encoder.lr=0.002",
                                "cluster.k=3"};
  sets.insert(sets.end(), extra.begin(), extra.end());
  return sets;
}

Outcome end_to_end_es() {
  const auto t0 = std::chrono::steady_clock::now();
  std::string d;
  bool ok = true;
  double gain_sum = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    testing_util::TempDir es, base;
    run("search", desk_sbm({"algo=\"es\"", "es.epochs=200", "es.population=8", "es.rounds=10"}), seed, es.path());
    // lambda = 0: the untrained encoder under the same seed and metric protocol
    run("single", desk_sbm({"single.task=\"Dgi\"", "single.epochs=0"}), seed, base.path());
    const json s = read_json(es.path() / "summary.json");
    const json b = read_json(base.path() / "summary.json");
    const auto& gens = s["generations"];
    bool monotone = true;
    for (std::size_t g = 1; g < gens.size(); ++g) {
      monotone = monotone && gens[g]["best_so_far"].get<double>() >= gens[g - 1]["best_so_far"].get<double>();
    }
    // also from the raw trajectory rows
    double running = -INFINITY;
    for (const auto& line : read_lines(es.path() / "trajectory.csv")) {
      const auto f = split_csv(line);
      if (f[0] == "iter") continue;
      if (f[f.size() - 4].empty()) continue;  // diverged candidate
      const double ph = std::stod(f[f.size() - 4]);
      running = std::max(running, ph);
    }
    const double best = s["best_pseudo_homophily"];
    const double gen0 = gens[0]["mean_fitness"];
    const double nmi_best = s["final_nmi"];
    const double nmi_zero = b["final_nmi"];
    const double gain = nmi_best - nmi_zero;
    gain_sum += gain;
    const bool a_ok = monotone && running == best;
    const bool b_ok = best >= gen0;
    ok = ok && a_ok && b_ok;
    d += "seed " + std::to_string(seed) + ": best P-H " + fmt(best, 3) + " vs gen-0 mean " + fmt(gen0, 3) + ", NMI " +
         fmt(nmi_best, 3) + " vs untrained " + fmt(nmi_zero, 3) + (a_ok ? "" : " [a]") + (b_ok ? "" : " [b]") + "; ";
  }
  // The gain is averaged over seeds: one seed's random encoder already sits
  // near the NMI ceiling of these 3-d features, leaving little to win.
  const double mean_gain = gain_sum / 3;
  const bool c_ok = mean_gain >= 0.05;
  ok = ok && c_ok;
  const double secs = seconds_since(t0);
  d += "mean NMI gain " + fmt(mean_gain, 3) + (c_ok ? "" : " [c]") + ", " + fmt(secs) + " s";
  if (secs >= 900) return fail("too slow: " + d);
  return ok ? pass(d) : fail(d);
}

Outcome end_to_end_ds() {
  const auto t0 = std::chrono::steady_clock::now();
  testing_util::TempDir out;
  run("search", desk_sbm({"algo=\"ds\"", "ds.epochs=500"}), 1, out.path());
  const json s = read_json(out.path() / "summary.json");
  const auto rows = read_lines(out.path() / "trajectory.csv");
  const auto header = split_csv(rows[0]);
  const std::size_t ph_col = header.size() - 4;
  double first = NAN, max_ph = -INFINITY;
  std::size_t lambda_violations = 0, n_rows = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto f = split_csv(rows[r]);
    ++n_rows;
    for (std::size_t c = 1; c < ph_col - 1; ++c) {
      const double l = std::stod(f[c]);
      if (!(l >= 0.0 && l <= 1.0)) ++lambda_violations;
    }
    // measured on evaluation rows only
    if (f[ph_col].empty()) continue;
    const double ph = std::stod(f[ph_col]);
    if (std::isnan(first)) first = ph;
    max_ph = std::max(max_ph, ph);
  }
  const double best = s["best_pseudo_homophily"];
  const double secs = seconds_since(t0);
  const std::string d = std::to_string(n_rows) + " iterations; P-H first " + fmt(first, 3) + ", checkpoint " +
                        fmt(best, 3) + " (iteration " + std::to_string(s["best_iteration"].get<int>()) + "), max " +
                        fmt(max_ph, 3) + "; " + std::to_string(lambda_violations) + " lambda entries outside [0,1]; " +
                        fmt(secs) + " s";
  if (n_rows != 500) return fail(d);
  if (lambda_violations != 0) return fail(d);
  if (!(best >= first) || !(max_ph > first) || best != max_ph) return fail(d);
  if (secs >= 600) return fail("too slow: " + d);
  return pass(d);
}

// ---------------------------------------------------------------- 9

int run_binary(const std::string& args) {
  const std::string cmd = std::string(AUTOSSL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string strip_last_column(const fs::path& p) {
  std::string out;
  for (const auto& l : read_lines(p)) out += l.substr(0, l.rfind(',')) + "\n";
  return out;
}

Outcome determinism() {
  const std::string small =
      " --set graph.sbm.block_sizes=[40,40] --set graph.sbm.p_in=0.2 --set graph.sbm.p_out=0.02"
      " --set task_options.dgi_samples=60 --set task_options.pairsim_pairs=200 --set task_options.pairdis_pairs=200"
      " --hidden 16";
  const std::vector<std::pair<std::string, std::string>> cases{
      {"search-es", "search --algo es --rounds 2 --population 4 --epochs 15" + small},
      {"search-ds", "search --algo ds --epochs 30" + small},
      {"single", "single --task PairSim --epochs 30" + small},
      {"grid2", "grid2 --task-a Par --task-b Dgi --steps 3 --epochs 10" + small},
  };
  std::string d;
  for (const auto& [name, args] : cases) {
    testing_util::TempDir a, b;
    for (const auto* dir : {&a, &b}) {
      const int rc = run_binary(args + " --seed 5 --out " + dir->path().string());
      if (rc != 0) return fail(name + " exited " + std::to_string(rc));
    }
    const std::string file = name == "grid2" ? "heatmap.csv" : "trajectory.csv";
    const std::string ta = strip_last_column(a.path() / file), tb = strip_last_column(b.path() / file);
    if (ta.empty() || ta != tb) return fail(name + ": " + file + " differs between reruns");
    if (name != "grid2" &&
        testing_util::read_file(a.path() / "checkpoint.bin") != testing_util::read_file(b.path() / "checkpoint.bin")) {
      return fail(name + ": checkpoint differs between reruns");
    }
    d += name + " ";
  }
  return pass("byte-identical reruns (wall-clock column excluded): " + d);
}

// ---------------------------------------------------------------- 10

Outcome citeseer_extended() {
  const char* slow = std::getenv("AUTOSSL_SLOW");
  if (!slow || std::string(slow) != "1") return skip("slow; set AUTOSSL_SLOW=1 to run");
  const auto root = data_dir();
  if (!root || !fs::is_directory(*root / "citeseer")) return skip("citeseer not found under AUTOSSL_DATA_DIR");
  const std::string graph = "graph.path=" + json((*root / "citeseer").string()).dump();
  double best_single = -INFINITY, dgi = NAN;
  std::string d;
  for (const auto& task : all_task_names()) {
    testing_util::TempDir out;
    run("single", {graph, "single.task=" + json(task).dump()}, 0, out.path());
    const double nmi = read_json(out.path() / "summary.json")["final_nmi"];
    if (task == "Dgi") dgi = nmi;
    best_single = std::max(best_single, nmi);
    d += task + " " + fmt(nmi, 3) + "; ";
  }
  testing_util::TempDir es;
  run("search", {graph, "algo=\"es\""}, 0, es.path());
  const double es_nmi = read_json(es.path() / "summary.json")["final_nmi"];
  d += "ES " + fmt(es_nmi, 3);
  const bool ok = std::abs(dgi - 0.439) <= 0.05 && es_nmi >= best_single - 0.02;
  return ok ? pass(d) : fail(d);
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, theorem_oracle}, {2, gradient_suite}, {3, closed_forms}, {4, dataset_homophily}, {5, kmeans_oracle},
      {6, cmaes_sphere},   {7, end_to_end_es},  {8, end_to_end_ds}, {9, determinism},       {10, citeseer_extended}};
  std::set<int> only;
  if (const char* o = std::getenv("AUTOSSL_ONLY")) {
    std::istringstream in(o);
    for (std::string t; std::getline(in, t, ',');) only.insert(std::stoi(t));
  }
  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.status == Outcome::kPass ? "PASS" : o.status == Outcome::kFail ? "FAIL" : "SKIP";
    if (o.status == Outcome::kFail) ++failures;
    std::cout << "criterion " << id << ": " << tag << "  " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
