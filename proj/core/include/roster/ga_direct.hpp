#pragma once

#include "roster/ga.hpp"
#include "roster/problem.hpp"
#include "roster/rng.hpp"

namespace roster {

/// Direct encoding: the chromosome is the roster itself, one pattern index
/// per nurse, evolved under penalty fitness.
TrialResult run_direct_ga(const ProblemInstance& inst, const GaConfig& cfg);

/// Each gene from `fitter` with probability `bias`, else from `other`.
Roster uniform_crossover(const Roster& fitter, const Roster& other, double bias, Rng& rng);

/// Cut drawn uniformly from 1..n-1. For n == 1 returns a copy of `fitter`.
Roster one_point_crossover(const Roster& fitter, const Roster& other, Rng& rng);
Roster one_point_crossover_at(const Roster& fitter, const Roster& other, std::size_t cut);

/// Each gene independently redrawn from F(i) with probability `rate`.
void mutate_direct(Roster& r, double rate, const ProblemInstance& inst, Rng& rng);

/// First-improvement descent on penalty fitness: nurses in index order,
/// each tries F(i) in order and takes the first strictly better pattern;
/// passes repeat until one makes no change.
Roster hillclimb(const ProblemInstance& inst, const Roster& r, double w_demand);

}  // namespace roster
