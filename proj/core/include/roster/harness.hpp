#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roster/exact.hpp"
#include "roster/ga.hpp"
#include "roster/ga_indirect.hpp"
#include "roster/instances.hpp"
#include "roster/problem.hpp"
#include "roster/stats.hpp"

namespace roster {

enum class Encoding { Direct, Indirect };

std::string_view to_string(Encoding encoding);
Encoding parse_encoding(std::string_view text);

/// A named, fully specified solver configuration.
struct AlgorithmPreset {
  std::string name;
  Encoding encoding = Encoding::Indirect;
  GaConfig ga;            ///< ga.seed is replaced per trial
  DecoderConfig decoder;  ///< indirect encoding only
  std::string description;
  /// Field paths fixed by the variant's published description.
  std::vector<std::string> specified;
  /// Field paths that carry a chosen default.
  std::vector<std::string> decided;

  void validate() const;
};

/// V1..V8, U1..U8 and W1..W8.
const std::vector<AlgorithmPreset>& builtin_presets();
/// Throws InstanceError for an unknown name.
const AlgorithmPreset& builtin_preset(std::string_view name);

nlohmann::json to_json(const AlgorithmPreset& preset);
/// Either a full preset object, or {"name": ..., "base": "<builtin>", ...}
/// where any listed field overrides the base.
AlgorithmPreset preset_from_json(const nlohmann::json& j);

/// One trial of a preset on an instance with the given seed.
TrialResult run_preset(const AlgorithmPreset& preset, const ProblemInstance& inst,
                       std::uint64_t seed);

/// Seed of trial `trial` of `algorithm` on `instance`:
///   s = derive_seed(derive_seed(base, algorithm), instance)
///   seed = mix64(s ^ mix64(trial))
/// Independent of execution order, job count and grid shape.
std::uint64_t trial_seed(std::uint64_t base_seed, std::string_view algorithm,
                         std::string_view instance, int trial);

/// An instance given by file or by generator settings.
struct InstanceSource {
  std::string id;
  std::optional<std::filesystem::path> file;
  std::optional<GeneratorConfig> generator;

  ProblemInstance load() const;
};

struct ExperimentConfig {
  std::vector<InstanceSource> instances;
  std::vector<AlgorithmPreset> algorithms;
  int trials = 20;
  std::uint64_t base_seed = 1;
  std::vector<double> alphas{1.0};
  std::filesystem::path out_dir = "results";
  int jobs = 1;

  /// K >= 1, unique names, alphas in [0, 1], jobs >= 1, every preset valid.
  void validate() const;
};

/// Relative instance paths resolve against `base_dir`. Unknown keys are rejected.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir = {});
ExperimentConfig read_experiment_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

inline constexpr std::string_view kResultsHeader =
    "algorithm,instance,trial,seed,cost,generations,time_ms";

struct ResultRow {
  std::string algorithm;
  std::string instance;
  int trial = 0;
  std::uint64_t seed = 0;
  ExtendedCost cost = ExtendedCost::infeasible();
  int generations = 0;
  double time_ms = 0.0;

  bool operator==(const ResultRow&) const = default;
};

std::string format_result_row(const ResultRow& row);
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
/// Throws ParseError with the offending line number.
std::vector<ResultRow> parse_results_csv(std::istream& in);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

/// Groups rows into trial sets, algorithms and instances in order of first
/// appearance.
std::vector<TrialSet> to_trial_sets(const std::vector<ResultRow>& rows);

struct ExperimentOutcome {
  std::filesystem::path results_file;
  std::vector<ResultRow> rows;
};

/// Loads and validates every instance, creates the output directory, then
/// runs trials on `cfg.jobs` workers. Rows are written to results.csv in
/// (algorithm, instance, trial) order as soon as each prefix is complete.
/// Generated instances are saved under instances/ for later baselines.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

struct ComparisonOutcome {
  std::vector<ComparisonReport> reports;
  bool stable = true;
  std::string stability;
  std::vector<std::filesystem::path> files;
};

/// One report per alpha, written as compare_alpha_<a>.json and .txt when
/// `out_dir` is set, plus a stability note comparing every report with the
/// first. Throws InstanceError naming missing grid cells.
ComparisonOutcome compare_results(const std::vector<ResultRow>& rows,
                                  const std::vector<double>& alphas,
                                  const std::optional<std::filesystem::path>& out_dir = {});

enum class Baseline { Exact, BestKnown };

std::string_view to_string(Baseline baseline);
Baseline parse_baseline(std::string_view text);

enum class Outcome { Infeasible, Optimal, Within3, Worse };

/// Class of one trial against a baseline cost (absent when nothing feasible
/// is known).
Outcome classify(const ExtendedCost& cost, std::optional<std::int64_t> baseline);

struct InstanceBaseline {
  std::string instance;
  std::optional<std::int64_t> cost;
  std::string source;  ///< "exact", "best_known" or "none"
  bool warning = false;
  std::string note;
};

struct SummaryCell {
  std::string algorithm;
  std::string instance;
  int infeasible = 0;
  int optimal = 0;
  int within_3 = 0;
  int worse = 0;

  int total() const { return infeasible + optimal + within_3 + worse; }
};

struct SummaryClassification {
  Baseline requested = Baseline::BestKnown;
  std::vector<InstanceBaseline> baselines;
  std::vector<SummaryCell> cells;
  bool warning = false;
};

struct SummaryOptions {
  Baseline baseline = Baseline::BestKnown;
  /// Directory holding <instance id>.json, needed for the exact baseline.
  std::optional<std::filesystem::path> instance_dir;
  ExactLimits limits;
};

/// Classifies every trial. With the exact baseline, an instance whose solve
/// exceeds its budget falls back to best-known and raises the warning flag.
SummaryClassification summarize(const std::vector<ResultRow>& rows, const SummaryOptions& options);

nlohmann::json to_json(const SummaryClassification& s);
std::string to_text(const SummaryClassification& s);
/// Bar-chart data, one line per (algorithm, instance).
std::string plot_data_csv(const SummaryClassification& s);

/// summarize() plus summary.json, summary.txt and summary_plot.csv in `out_dir`.
SummaryClassification emit_summary(const std::vector<ResultRow>& rows, const SummaryOptions& options,
                                   const std::filesystem::path& out_dir);

}  // namespace roster
