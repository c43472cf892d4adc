#include "roster/ga_direct.hpp"

#include "evolution.hpp"

namespace roster {

Roster uniform_crossover(const Roster& fitter, const Roster& other, double bias, Rng& rng) {
  Roster child = fitter;
  for (std::size_t i = 0; i < child.assignment.size(); ++i) {
    if (!rng.bernoulli(bias)) child.assignment[i] = other.assignment[i];
  }
  return child;
}

Roster one_point_crossover_at(const Roster& fitter, const Roster& other, std::size_t cut) {
  Roster child = fitter;
  for (std::size_t i = cut; i < child.assignment.size(); ++i) child.assignment[i] = other.assignment[i];
  return child;
}

Roster one_point_crossover(const Roster& fitter, const Roster& other, Rng& rng) {
  const std::size_t n = fitter.assignment.size();
  if (n < 2) return fitter;
  return one_point_crossover_at(fitter, other, 1 + rng.below(n - 1));
}

void mutate_direct(Roster& r, double rate, const ProblemInstance& inst, Rng& rng) {
  if (rate <= 0.0) return;
  for (int i = 0; i < inst.nurse_count(); ++i) {
    if (rng.bernoulli(rate)) r.assignment[i] = rng.pick(inst.feasible(i));
  }
}

Roster hillclimb(const ProblemInstance& inst, const Roster& r, double w_demand) {
  validate_roster(inst, r);
  Roster out = r;
  CoverState state(inst, out);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < inst.nurse_count(); ++i) {
      const int cur = out.assignment[i];
      for (int j : inst.feasible(i)) {
        if (j == cur) continue;
        const double delta = static_cast<double>(inst.cost(i, j) - inst.cost(i, cur)) +
                             w_demand * static_cast<double>(state.move_delta(i, cur, j));
        if (delta < 0.0) {
          state.apply(i, cur, -1);
          state.apply(i, j, +1);
          out.assignment[i] = j;
          changed = true;
          break;
        }
      }
    }
  }
  return out;
}

namespace {

class DirectPolicy {
 public:
  DirectPolicy(const ProblemInstance& inst, const GaConfig& cfg) : inst_(inst), cfg_(cfg) {
    switch (cfg.crossover.kind) {
      case CrossoverKind::Uniform:
      case CrossoverKind::OnePoint:
      case CrossoverKind::RankBiased:
      case CrossoverKind::FitnessBiased: break;
      default:
        throw InstanceError("direct GA does not support crossover \"" +
                            std::string(to_string(cfg.crossover.kind)) + "\"");
    }
    if (cfg.auto_weights) throw InstanceError("direct GA has no decoder weights to adapt");
  }

  Roster random(Rng& rng) const {
    Roster r;
    r.assignment.reserve(inst_.nurse_count());
    for (int i = 0; i < inst_.nurse_count(); ++i) r.assignment.push_back(rng.pick(inst_.feasible(i)));
    return r;
  }

  void evaluate(detail::Individual<Roster>& ind) const {
    ind.roster = ind.genome;
    ind.cost = 0;
    for (int i = 0; i < inst_.nurse_count(); ++i) ind.cost += inst_.cost(i, ind.genome.assignment[i]);
    const std::int64_t shortfall = CoverState(inst_, ind.genome).shortfall();
    ind.feasible = shortfall == 0;
    ind.fitness = static_cast<double>(ind.cost) +
                  (shortfall == 0 ? 0.0 : cfg_.w_demand * static_cast<double>(shortfall));
  }

  Roster crossover(const Roster& a, const Roster& b, const detail::Parents& parents, Rng& rng) const {
    switch (cfg_.crossover.kind) {
      case CrossoverKind::OnePoint: return one_point_crossover(a, b, rng);
      case CrossoverKind::RankBiased: {
        const double wa = linear_ranking_weight(parents.rank_fitter, parents.size);
        const double wb = linear_ranking_weight(parents.rank_other, parents.size);
        return uniform_crossover(a, b, wa / (wa + wb), rng);
      }
      case CrossoverKind::FitnessBiased: {
        const double sum = parents.fitness_fitter + parents.fitness_other;
        return uniform_crossover(a, b, sum > 0.0 ? parents.fitness_other / sum : 0.5, rng);
      }
      default: return uniform_crossover(a, b, cfg_.crossover.bias, rng);
    }
  }

  void mutate(Roster& r, Rng& rng) const { mutate_direct(r, cfg_.mutation_rate, inst_, rng); }

  bool improve(Roster& r) const {
    if (!cfg_.hillclimber) return false;
    Roster better = hillclimb(inst_, r, cfg_.w_demand);
    if (better == r) return false;
    r = std::move(better);
    return true;
  }

  void offspring(double, double) {}
  void begin_generation(Rng&) {}
  bool end_generation(bool) { return false; }

 private:
  const ProblemInstance& inst_;
  const GaConfig& cfg_;
};

}  // namespace

TrialResult run_direct_ga(const ProblemInstance& inst, const GaConfig& cfg) {
  DirectPolicy policy(inst, cfg);
  return detail::evolve<Roster>(cfg, policy);
}

}  // namespace roster
