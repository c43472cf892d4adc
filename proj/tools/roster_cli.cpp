// roster: command-line front end for instance generation, single solves,
// experiment grids, statistical comparison and outcome summaries.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "roster/exact.hpp"
#include "roster/harness.hpp"
#include "roster/instances.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw roster::ParseError(path.string() + ": " + e.what());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

struct GenerateArgs {
  std::string config;
  std::string preset = "desk";
  std::optional<std::uint64_t> seed;
  int count = 1;
  int nurses = 5;
  std::string out = ".";
  std::string name = "instance";
};

int cmd_generate(const GenerateArgs& a) {
  roster::GeneratorConfig base;
  if (!a.config.empty()) {
    base = roster::generator_config_from_json(read_json(a.config));
  } else {
    base = roster::generator_preset(a.preset, a.nurses);
  }
  if (a.seed) base.seed = *a.seed;
  base.validate();
  ensure_dir(a.out);
  const int width = std::max<int>(2, static_cast<int>(std::to_string(a.count).size()));
  for (int t = 0; t < a.count; ++t) {
    roster::GeneratorConfig cfg = base;
    cfg.seed = base.seed + static_cast<std::uint64_t>(t);
    std::ostringstream file;
    file << a.name;
    if (a.count > 1) file << '-' << std::setw(width) << std::setfill('0') << (t + 1);
    file << ".json";
    const fs::path path = fs::path(a.out) / file.str();
    const auto inst = roster::generate_instance(cfg);
    roster::write_instance(inst, path);
    std::cout << path.string() << "  n=" << inst.nurse_count() << " m=" << inst.pattern_count()
              << " p=" << inst.grade_count() << " seed=" << cfg.seed << "\n";
  }
  return 0;
}

struct SolveArgs {
  std::string instance;
  std::string preset = "V4";
  std::string config;
  std::uint64_t seed = 1;
  std::optional<int> generations;
  bool show_roster = false;
};

int cmd_solve(const SolveArgs& a) {
  const auto inst = roster::read_instance(a.instance);
  roster::AlgorithmPreset preset =
      a.config.empty() ? roster::builtin_preset(a.preset) : roster::preset_from_json(read_json(a.config));
  if (a.generations) preset.ga.generations = *a.generations;
  preset.validate();
  const auto result = roster::run_preset(preset, inst, a.seed);
  std::cout << result.best.to_string() << "\n";
  std::cerr << "algorithm=" << preset.name << " seed=" << a.seed << " generations=" << result.generations
            << " time_ms=" << std::fixed << std::setprecision(1) << result.wall_ms << "\n";
  if (a.show_roster) {
    for (std::size_t i = 0; i < result.best_roster.assignment.size(); ++i) {
      const int j = result.best_roster.assignment[i];
      std::cout << "nurse " << i << ": pattern " << j << " " << inst.pattern(j).to_string() << " cost "
                << inst.cost(static_cast<int>(i), j) << "\n";
    }
  }
  return 0;
}

struct ExactArgs {
  std::string instance;
  std::uint64_t max_nodes = roster::ExactLimits{}.max_nodes;
  double max_seconds = 60.0;
};

int cmd_exact(const ExactArgs& a) {
  const auto inst = roster::read_instance(a.instance);
  roster::ExactLimits limits;
  limits.max_nodes = a.max_nodes;
  limits.max_time = std::chrono::milliseconds(static_cast<std::int64_t>(a.max_seconds * 1000.0));
  const auto r = roster::exact_solve(inst, limits);
  std::cout << roster::to_string(r.status);
  if (r.roster) std::cout << " " << r.cost;
  std::cout << "\n";
  std::cerr << "nodes=" << r.nodes << "\n";
  return r.status == roster::ExactStatus::BudgetExceeded ? 3 : 0;
}

struct ExperimentArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<double> alphas;
  std::string out;
  std::optional<int> jobs;
};

void print_comparison(const roster::ComparisonOutcome& c) {
  for (const auto& r : c.reports) std::cout << roster::to_text(r) << "\n";
  std::cout << "Alpha stability: " << c.stability << "\n";
}

int cmd_experiment(const ExperimentArgs& a) {
  auto cfg = roster::read_experiment_config(a.config);
  if (a.seed) cfg.base_seed = *a.seed;
  if (!a.alphas.empty()) cfg.alphas = a.alphas;
  if (!a.out.empty()) cfg.out_dir = a.out;
  if (a.jobs) cfg.jobs = *a.jobs;
  cfg.validate();
  const auto outcome = roster::run_experiment(cfg);
  std::cout << "wrote " << outcome.rows.size() << " rows to " << outcome.results_file.string() << "\n";
  const auto cmp = roster::compare_results(outcome.rows, cfg.alphas, cfg.out_dir);
  print_comparison(cmp);
  return 0;
}

struct CompareArgs {
  std::string results;
  std::vector<double> alphas{1.0};
  std::string out;
};

int cmd_compare(const CompareArgs& a) {
  const auto rows = roster::read_results_csv(a.results);
  std::optional<fs::path> out;
  if (!a.out.empty()) out = fs::path(a.out);
  print_comparison(roster::compare_results(rows, a.alphas, out));
  return 0;
}

struct SummaryArgs {
  std::string results;
  std::string baseline = "best_known";
  std::string instances;
  std::string out;
  double max_seconds = 60.0;
};

int cmd_summary(const SummaryArgs& a) {
  const auto rows = roster::read_results_csv(a.results);
  roster::SummaryOptions options;
  options.baseline = roster::parse_baseline(a.baseline);
  options.instance_dir = a.instances.empty() ? fs::path(a.results).parent_path() / "instances" : fs::path(a.instances);
  options.limits.max_time = std::chrono::milliseconds(static_cast<std::int64_t>(a.max_seconds * 1000.0));
  const auto s = a.out.empty() ? roster::summarize(rows, options) : roster::emit_summary(rows, options, a.out);
  std::cout << roster::to_text(s);
  return 0;
}

int cmd_presets(const std::string& name, const std::string& out) {
  json j;
  if (name.empty()) {
    j = json::array();
    for (const auto& p : roster::builtin_presets()) j.push_back(roster::to_json(p));
  } else {
    j = roster::to_json(roster::builtin_preset(name));
  }
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << j.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nurse rostering solvers and infeasibility-aware algorithm comparison"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write generated instance files");
  generate->add_option("--config", gen.config, "Generator config JSON");
  generate->add_option("--preset", gen.preset, "Built-in generator: desk, ward or tiny")->capture_default_str();
  generate->add_option("--seed", gen.seed, "Seed of the first instance (later ones add 1 each)");
  generate->add_option("--count", gen.count, "Number of instances")->check(CLI::PositiveNumber)->capture_default_str();
  generate->add_option("--nurses", gen.nurses, "Nurses for the tiny preset")->check(CLI::Range(1, 12))->capture_default_str();
  generate->add_option("--name", gen.name, "File name stem")->capture_default_str();
  generate->add_option("--out", gen.out, "Output directory")->capture_default_str();

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Run one algorithm once and print the best ExtendedCost");
  solve_cmd->add_option("instance", solve.instance, "Instance file")->required();
  solve_cmd->add_option("--preset", solve.preset, "Built-in preset name")->capture_default_str();
  solve_cmd->add_option("--config", solve.config, "Preset JSON (overrides --preset)");
  solve_cmd->add_option("--seed", solve.seed, "Trial seed")->capture_default_str();
  solve_cmd->add_option("--generations", solve.generations, "Override the generation budget");
  solve_cmd->add_flag("--roster", solve.show_roster, "Print the best roster");

  ExactArgs ex;
  auto* exact = app.add_subcommand("exact", "Solve an instance to optimality by branch and bound");
  exact->add_option("instance", ex.instance, "Instance file")->required();
  exact->add_option("--max-nodes", ex.max_nodes, "Node budget")->capture_default_str();
  exact->add_option("--max-seconds", ex.max_seconds, "Time budget")->capture_default_str();

  ExperimentArgs exp;
  auto* experiment = app.add_subcommand("experiment", "Run a full algorithm x instance x trial grid");
  experiment->add_option("--config", exp.config, "Experiment config JSON")->required();
  experiment->add_option("--seed", exp.seed, "Override the base seed");
  experiment->add_option("--alpha", exp.alphas, "Comma-separated alpha list")->delimiter(',');
  experiment->add_option("--out", exp.out, "Override the output directory");
  experiment->add_option("--jobs", exp.jobs, "Worker threads")->check(CLI::PositiveNumber);

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Rank algorithms and test differences from a results CSV");
  compare->add_option("results", cmp.results, "Results CSV")->required();
  compare->add_option("--alpha", cmp.alphas, "Comma-separated alpha list")->delimiter(',')->capture_default_str();
  compare->add_option("--out", cmp.out, "Directory for JSON and text reports");

  SummaryArgs sum;
  auto* summary = app.add_subcommand("summary", "Classify trials as infeasible, optimal, within 3 or worse");
  summary->add_option("results", sum.results, "Results CSV")->required();
  summary->add_option("--baseline", sum.baseline, "exact or best_known")->capture_default_str();
  summary->add_option("--instances", sum.instances, "Instance directory (default: <results dir>/instances)");
  summary->add_option("--out", sum.out, "Directory for summary.json, summary.txt and summary_plot.csv");
  summary->add_option("--max-seconds", sum.max_seconds, "Exact solve budget per instance")->capture_default_str();

  std::string preset_name;
  std::string preset_out;
  auto* presets = app.add_subcommand("presets", "Print the built-in algorithm presets as JSON");
  presets->add_option("name", preset_name, "Single preset to print");
  presets->add_option("--out", preset_out, "Write to a file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) return cmd_generate(gen);
    if (*solve_cmd) return cmd_solve(solve);
    if (*exact) return cmd_exact(ex);
    if (*experiment) return cmd_experiment(exp);
    if (*compare) return cmd_compare(cmp);
    if (*summary) return cmd_summary(sum);
    if (*presets) return cmd_presets(preset_name, preset_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
