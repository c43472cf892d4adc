#pragma once

#include <chrono>
#include <cstdint>
#include <optional>

#include "roster/problem.hpp"

namespace roster {

struct ExactLimits {
  std::uint64_t max_nodes = 50'000'000;
  std::chrono::milliseconds max_time{60'000};
};

enum class ExactStatus { Optimal, ProvenInfeasible, BudgetExceeded };

std::string_view to_string(ExactStatus status);

struct ExactResult {
  ExactStatus status = ExactStatus::BudgetExceeded;
  /// Set on Optimal; on BudgetExceeded holds the incumbent, if any.
  std::optional<Roster> roster;
  std::int64_t cost = 0;
  std::uint64_t nodes = 0;
};

/// Depth-first branch and bound over nurses in index order. Patterns are
/// tried cheapest first. Prunes on (partial cost + sum of remaining minimum
/// costs) >= incumbent, and on any (slot, grade) whose residual demand
/// exceeds what the unassigned nurses could still supply. Deterministic.
/// Meant for desk-scale instances (n up to ~8, m up to ~40).
ExactResult exact_solve(const ProblemInstance& inst, const ExactLimits& limits = {});

}  // namespace roster
