#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roster/problem.hpp"

namespace roster {

/// Malformed instance or generator files.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Extra filter on combined (day and night) patterns.
enum class CombinedRule {
  Any,             ///< every pattern with both halves nonempty
  DaysThenNights,  ///< every worked day precedes every worked night
};

/// All distinct patterns working exactly one of the requested counts in the
/// day half (day-only), night half (night-only) or whole week (combined).
/// Groups come in that order, counts ascending, and each group lists the
/// worked-slot sets in lexicographic order, so {5} days starts with
/// 11111000000000. Duplicates keep their first position.
std::vector<ShiftPattern> enumerate_patterns(const std::set<int>& day_counts,
                                             const std::set<int>& night_counts,
                                             const std::set<int>& combined_counts,
                                             CombinedRule rule = CombinedRule::Any);

struct ContractShare {
  ContractType type = ContractType::Days;
  int shifts = 5;
  double weight = 1.0;
};

struct GeneratorConfig {
  int nurses = 10;
  int grades = 3;
  std::vector<ContractShare> contracts{{ContractType::Days, 5, 0.5},
                                       {ContractType::Nights, 4, 0.4},
                                       {ContractType::Both, 5, 0.05},
                                       {ContractType::Both, 6, 0.05}};
  CombinedRule combined_rule = CombinedRule::Any;
  double tightness = 0.8;
  std::int64_t max_cost = 20;
  std::uint64_t seed = 1;

  void validate() const;

  /// n=10, p=3, 62 patterns.
  static GeneratorConfig desk();
  /// n=30, p=3, days and nights {3,4,5} plus combined {4,5,6}: 406 patterns.
  static GeneratorConfig ward();
  /// Tiny instances (14 patterns) the exact solver handles in milliseconds.
  static GeneratorConfig tiny(int nurses, std::uint64_t seed);
};

/// Number of nurses per contract share, by largest remainder.
std::vector<int> allocate_contracts(const GeneratorConfig& cfg);

/// The catalog a config implies: every contract's count in its group.
std::vector<ShiftPattern> catalog_for(const GeneratorConfig& cfg);

/// Deterministic in cfg.seed. Demand is floor(tightness * cover) of a random
/// seeding roster, so that roster is always feasible.
ProblemInstance generate_instance(const GeneratorConfig& cfg);

/// The roster generate_instance uses to set the demand.
Roster seeding_roster(const GeneratorConfig& cfg, const ProblemInstance& inst);

/// "desk", "ward" or "tiny" (the last sized by `nurses`).
GeneratorConfig generator_preset(std::string_view name, int nurses = 5);

nlohmann::json to_json(const GeneratorConfig& cfg);
/// An optional "preset" key picks the starting point; other keys override it.
GeneratorConfig generator_config_from_json(const nlohmann::json& j);

inline constexpr int kInstanceFormatVersion = 1;

/// Instance file text: one JSON object, matrix rows on single lines.
std::string instance_to_string(const ProblemInstance& inst);
ProblemInstance instance_from_string(const std::string& text);

void write_instance(const ProblemInstance& inst, const std::filesystem::path& path);
ProblemInstance read_instance(const std::filesystem::path& path);

}  // namespace roster
