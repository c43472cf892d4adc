#include "roster/ga.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace roster {

std::string_view to_string(CrossoverKind kind) {
  switch (kind) {
    case CrossoverKind::Uniform: return "uniform";
    case CrossoverKind::OnePoint: return "one_point";
    case CrossoverKind::Order: return "order";
    case CrossoverKind::Automatic: return "automatic";
    case CrossoverKind::RankBiased: return "rank_biased";
    case CrossoverKind::FitnessBiased: return "fitness_biased";
  }
  return "?";
}

CrossoverKind parse_crossover_kind(std::string_view text) {
  for (auto kind : {CrossoverKind::Uniform, CrossoverKind::OnePoint, CrossoverKind::Order,
                    CrossoverKind::Automatic, CrossoverKind::RankBiased,
                    CrossoverKind::FitnessBiased}) {
    if (to_string(kind) == text) return kind;
  }
  throw InstanceError("unknown crossover kind \"" + std::string(text) + "\"");
}

namespace {
bool unit_interval(double x) { return x >= 0.0 && x <= 1.0; }
}  // namespace

void GaConfig::validate() const {
  if (population < 2) throw InstanceError("GA: population must be >= 2");
  if (generations < 0) throw InstanceError("GA: generations must be >= 0");
  if (!unit_interval(crossover.bias)) throw InstanceError("GA: crossover bias must lie in [0, 1]");
  if (!unit_interval(mutation_rate)) throw InstanceError("GA: mutation rate must lie in [0, 1]");
  if (!unit_interval(elitism)) throw InstanceError("GA: elitism must lie in [0, 1]");
  if (islands.count < 1) throw InstanceError("GA: island count must be >= 1");
  if (population / islands.count < 2) {
    throw InstanceError("GA: every island needs at least 2 individuals");
  }
  if (islands.migration_interval < 1) throw InstanceError("GA: migration interval must be >= 1");
  if (islands.migrants < 0) throw InstanceError("GA: migrants must be >= 0");
  if (!(w_demand >= 0.0) || !std::isfinite(w_demand)) {
    throw InstanceError("GA: w_demand must be finite and nonnegative");
  }
}

int GaConfig::elite_count(int size) const {
  if (elitism <= 0.0) return 0;
  const int e = static_cast<int>(std::lround(elitism * size));
  return std::clamp(e, 1, size);
}

double linear_ranking_weight(int rank, int size, double pressure) {
  if (size == 1) return 1.0;
  const double n = size;
  return (2.0 - pressure) / n + 2.0 * (pressure - 1.0) * (n - 1.0 - rank) / (n * (n - 1.0));
}

std::vector<double> linear_ranking_cdf(int size, double pressure) {
  std::vector<double> cdf(size);
  double acc = 0.0;
  for (int r = 0; r < size; ++r) {
    acc += linear_ranking_weight(r, size, pressure);
    cdf[r] = acc;
  }
  return cdf;
}

}  // namespace roster
