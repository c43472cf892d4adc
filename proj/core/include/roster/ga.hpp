#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "roster/problem.hpp"

namespace roster {

enum class CrossoverKind {
  Uniform,        ///< gene from the fitter parent with probability `bias`
  OnePoint,       ///< prefix from the fitter parent
  Order,          ///< OX1 (permutations only)
  Automatic,      ///< adaptive choice between OX1 and two-point order crossover (permutations only)
  RankBiased,     ///< uniform, bias from the parents' selection weights
  FitnessBiased,  ///< uniform, bias from the parents' penalty fitness ratio
};

std::string_view to_string(CrossoverKind kind);
CrossoverKind parse_crossover_kind(std::string_view text);

struct CrossoverConfig {
  CrossoverKind kind = CrossoverKind::Uniform;
  double bias = 0.8;
};

/// Ring of sub-populations; every `migration_interval` generations each
/// island sends its best `migrants` to replace the next island's worst.
struct IslandConfig {
  int count = 1;
  int migration_interval = 10;
  int migrants = 1;
};

struct GaConfig {
  int population = 100;
  int generations = 200;
  CrossoverConfig crossover;
  /// Direct GA: per-gene replacement probability. Indirect GA: per-child
  /// probability of one swap.
  double mutation_rate = 0.05;
  double elitism = 0.1;
  IslandConfig islands;
  bool hillclimber = false;
  /// Indirect GA only: adapt the decoder's cover weight each generation.
  bool auto_weights = false;
  double w_demand = 200.0;
  std::uint64_t seed = 1;

  void validate() const;
  /// Number of elite slots in a sub-population of the given size.
  int elite_count(int size) const;
};

struct TrialResult {
  ExtendedCost best = ExtendedCost::infeasible();
  /// Best individual ever observed, ranked by (feasible first, then cost,
  /// then penalty fitness).
  Roster best_roster;
  double best_fitness = 0.0;
  int generations = 0;
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
  /// Lowest penalty fitness in the population after each generation,
  /// index 0 being the initial population.
  std::vector<double> best_fitness_trace;
};

/// Cumulative linear-ranking selection weights for a population sorted best
/// first; selective pressure 1.5.
std::vector<double> linear_ranking_cdf(int size, double pressure = 1.5);

/// Selection weight of the individual at sorted position `rank` (0 = best).
double linear_ranking_weight(int rank, int size, double pressure = 1.5);

}  // namespace roster
