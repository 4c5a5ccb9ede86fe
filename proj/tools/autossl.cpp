// autossl command-line driver.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "autossl/cli/commands.hpp"

namespace {

struct Flags {
  std::optional<std::string> config;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  std::string out = "out";
  std::optional<std::string> algo, graph, task, task_a, task_b, checkpoint;
  std::optional<int> rounds, population, epochs, workers, hidden, steps;
};

// Convenience flags expand to --set overrides and are applied after them.
std::vector<std::string> expand(const std::string& command, const Flags& f) {
  std::vector<std::string> out = f.sets;
  auto quoted = [](const std::string& v) { return nlohmann::json(v).dump(); };
  if (f.algo) out.push_back("algo=" + quoted(*f.algo));
  if (f.graph) out.push_back("graph.path=" + quoted(*f.graph));
  if (f.checkpoint) out.push_back("checkpoint=" + quoted(*f.checkpoint));
  if (f.task) out.push_back("single.task=" + quoted(*f.task));
  if (f.task_a) out.push_back("grid2.task_a=" + quoted(*f.task_a));
  if (f.task_b) out.push_back("grid2.task_b=" + quoted(*f.task_b));
  if (f.rounds) out.push_back("es.rounds=" + std::to_string(*f.rounds));
  if (f.population) out.push_back("es.population=" + std::to_string(*f.population));
  if (f.workers) out.push_back("es.workers=" + std::to_string(*f.workers));
  if (f.hidden) out.push_back("encoder.hidden=" + std::to_string(*f.hidden));
  if (f.steps) out.push_back("grid2.steps=" + std::to_string(*f.steps));
  if (f.epochs) {
    const std::string e = std::to_string(*f.epochs);
    if (command == "single") {
      out.push_back("single.epochs=" + e);
    } else if (command == "grid2") {
      out.push_back("grid2.epochs=" + e);
    } else {
      out.push_back("es.epochs=" + e);
      out.push_back("ds.epochs=" + e);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Automated self-supervised task weighting for graph encoders"};
  app.require_subcommand(1);
  Flags flags;
  for (const auto& name : autossl::cli::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", flags.config, "JSON configuration file");
    sub->add_option("--set", flags.sets, "override a config field, key=value (repeatable)");
    sub->add_option("--seed", flags.seed, "master seed")->required();
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--algo", flags.algo, "es or ds");
    sub->add_option("--graph", flags.graph, "graph directory");
    sub->add_option("--task", flags.task, "task for single");
    sub->add_option("--task-a", flags.task_a, "first task for grid2");
    sub->add_option("--task-b", flags.task_b, "second task for grid2");
    sub->add_option("--steps", flags.steps, "grid points per axis for grid2");
    sub->add_option("--rounds", flags.rounds, "ES rounds");
    sub->add_option("--population", flags.population, "ES population");
    sub->add_option("--epochs", flags.epochs, "training epochs");
    sub->add_option("--workers", flags.workers, "parallel candidate evaluations");
    sub->add_option("--hidden", flags.hidden, "embedding dimension");
    sub->add_option("--checkpoint", flags.checkpoint, "encoder checkpoint for eval");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : autossl::cli::kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  nlohmann::json doc;
  try {
    std::optional<std::filesystem::path> file;
    if (flags.config) file = *flags.config;
    doc = autossl::cli::load_config(file, expand(command, flags));
  } catch (const autossl::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return autossl::cli::kConfigError;
  }
  return autossl::cli::run_command(command, doc, flags.seed, flags.out);
}
