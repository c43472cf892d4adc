#pragma once

// Generational loop shared by the direct and indirect GAs.

#include <algorithm>
#include <chrono>
#include <numeric>
#include <vector>

#include "roster/ga.hpp"
#include "roster/problem.hpp"
#include "roster/rng.hpp"

namespace roster::detail {

template <typename Genome>
struct Individual {
  Genome genome;
  Roster roster;
  double fitness = 0.0;
  std::int64_t cost = 0;
  bool feasible = false;
};

struct Parents {
  int rank_fitter;
  int rank_other;
  int size;
  double fitness_fitter;
  double fitness_other;
};

/// Lexicographic "best ever" order: feasible first, then cost, then fitness.
template <typename G>
bool better(const Individual<G>& a, const Individual<G>& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (a.feasible && a.cost != b.cost) return a.cost < b.cost;
  return a.fitness < b.fitness;
}

/// Policy interface (duck-typed):
///   Genome random(Rng&)
///   void evaluate(Individual<Genome>&)            fills roster/fitness/cost/feasible
///   Genome crossover(const Genome& fitter, const Genome& other, const Parents&, Rng&)
///   void mutate(Genome&, Rng&)
///   bool improve(Genome&)                          elite local search; true if changed
///   void offspring(double child, double parents_mean)
///   void begin_generation(Rng&)
///   bool end_generation(bool best_feasible)        true if fitness must be recomputed
template <typename Genome, typename Policy>
TrialResult evolve(const GaConfig& cfg, Policy& policy) {
  using Ind = Individual<Genome>;
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  Rng rng(derive_seed(cfg.seed, "ga"));

  const int islands = cfg.islands.count;
  std::vector<int> sizes(islands, cfg.population / islands);
  for (int t = 0; t < cfg.population % islands; ++t) ++sizes[t];

  Ind best_ever;
  bool have_best = false;
  auto consider = [&](const Ind& ind) {
    if (!have_best || better(ind, best_ever)) {
      best_ever = ind;
      have_best = true;
    }
  };
  auto evaluate = [&](Ind& ind) {
    policy.evaluate(ind);
    consider(ind);
  };
  auto by_fitness = [](const Ind& a, const Ind& b) { return a.fitness < b.fitness; };

  std::vector<std::vector<Ind>> pops(islands);
  for (int isl = 0; isl < islands; ++isl) {
    pops[isl].reserve(sizes[isl]);
    for (int t = 0; t < sizes[isl]; ++t) {
      Ind ind;
      ind.genome = policy.random(rng);
      evaluate(ind);
      pops[isl].push_back(std::move(ind));
    }
    std::stable_sort(pops[isl].begin(), pops[isl].end(), by_fitness);
  }

  TrialResult result;
  // Lowest fitness over all islands and whether that individual is feasible.
  auto population_best = [&] {
    const Ind* top = &pops[0].front();
    for (const auto& pop : pops) {
      if (pop.front().fitness < top->fitness) top = &pop.front();
    }
    return std::pair{top->fitness, top->feasible};
  };
  result.best_fitness_trace.push_back(population_best().first);

  std::vector<std::vector<double>> cdfs(islands);
  for (int isl = 0; isl < islands; ++isl) cdfs[isl] = linear_ranking_cdf(sizes[isl]);

  auto select = [&](int isl) {
    const auto& cdf = cdfs[isl];
    const double u = rng.unit() * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), sizes[isl] - 1));
  };

  for (int gen = 1; gen <= cfg.generations; ++gen) {
    policy.begin_generation(rng);
    for (int isl = 0; isl < islands; ++isl) {
      auto& pop = pops[isl];
      const int size = sizes[isl];
      const int elites = cfg.elite_count(size);
      std::vector<Ind> next;
      next.reserve(size);
      for (int e = 0; e < elites; ++e) {
        Ind elite = pop[e];
        if (policy.improve(elite.genome)) evaluate(elite);
        next.push_back(std::move(elite));
      }
      while (static_cast<int>(next.size()) < size) {
        int ra = select(isl);
        int rb = select(isl);
        if (rb < ra) std::swap(ra, rb);
        const Ind& fitter = pop[ra];
        const Ind& other = pop[rb];
        Parents parents{ra, rb, size, fitter.fitness, other.fitness};
        Ind child;
        child.genome = policy.crossover(fitter.genome, other.genome, parents, rng);
        policy.mutate(child.genome, rng);
        evaluate(child);
        policy.offspring(child.fitness, 0.5 * (fitter.fitness + other.fitness));
        next.push_back(std::move(child));
      }
      std::stable_sort(next.begin(), next.end(), by_fitness);
      pop = std::move(next);
    }

    if (islands > 1 && gen % cfg.islands.migration_interval == 0) {
      std::vector<std::vector<Ind>> emigrants(islands);
      for (int isl = 0; isl < islands; ++isl) {
        const int k = std::min(cfg.islands.migrants, sizes[isl]);
        emigrants[isl].assign(pops[isl].begin(), pops[isl].begin() + k);
      }
      for (int isl = 0; isl < islands; ++isl) {
        auto& target = pops[(isl + 1) % islands];
        const auto& incoming = emigrants[isl];
        const int k = std::min<int>(static_cast<int>(incoming.size()), static_cast<int>(target.size()) - 1);
        for (int t = 0; t < k; ++t) target[target.size() - 1 - t] = incoming[t];
        std::stable_sort(target.begin(), target.end(), by_fitness);
      }
    }

    const auto [best_f, best_feasible] = population_best();
    if (policy.end_generation(best_feasible)) {
      for (auto& pop : pops) {
        for (auto& ind : pop) evaluate(ind);
        std::stable_sort(pop.begin(), pop.end(), by_fitness);
      }
      result.best_fitness_trace.push_back(population_best().first);
    } else {
      result.best_fitness_trace.push_back(best_f);
    }
    result.generations = gen;
  }

  result.best = best_ever.feasible ? ExtendedCost::feasible(best_ever.cost) : ExtendedCost::infeasible();
  result.best_roster = best_ever.roster;
  result.best_fitness = best_ever.fitness;
  result.seed = cfg.seed;
  result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace roster::detail
