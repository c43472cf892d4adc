#include "roster/exact.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace roster {

std::string_view to_string(ExactStatus status) {
  switch (status) {
    case ExactStatus::Optimal: return "optimal";
    case ExactStatus::ProvenInfeasible: return "proven_infeasible";
    case ExactStatus::BudgetExceeded: return "budget_exceeded";
  }
  return "?";
}

namespace {

class BranchAndBound {
 public:
  BranchAndBound(const ProblemInstance& inst, const ExactLimits& limits)
      : inst_(inst),
        limits_(limits),
        n_(inst.nurse_count()),
        p_(inst.grade_count()),
        state_(inst),
        current_(static_cast<std::size_t>(n_), -1),
        start_(std::chrono::steady_clock::now()) {
    // Candidate order per nurse: cheapest first, ties by index.
    order_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      auto fi = inst.feasible(i);
      order_[i].assign(fi.begin(), fi.end());
      std::stable_sort(order_[i].begin(), order_[i].end(),
                       [&](int a, int b) { return inst.cost(i, a) < inst.cost(i, b); });
    }
    // Suffix sums of min cost.
    min_suffix_.assign(n_ + 1, 0);
    for (int i = n_ - 1; i >= 0; --i) min_suffix_[i] = min_suffix_[i + 1] + inst.min_cost(i);
    // max_supply_[i](k, s): nurses i..n-1 that could cover slot k for grade column s.
    max_supply_.assign(n_ + 1, Matrix<int>(kSlots, p_));
    for (int i = n_ - 1; i >= 0; --i) {
      max_supply_[i] = max_supply_[i + 1];
      for (int k = 0; k < kSlots; ++k) {
        const bool can = std::any_of(order_[i].begin(), order_[i].end(),
                                     [&](int j) { return inst.pattern(j).covers(k); });
        if (!can) continue;
        for (int s = inst.nurse(i).grade - 1; s < p_; ++s) ++max_supply_[i](k, s);
      }
    }
  }

  ExactResult run() {
    ExactResult result;
    aborted_ = false;
    search(0, 0);
    result.nodes = nodes_;
    if (best_cost_ != kNone) {
      result.roster = Roster{best_};
      result.cost = best_cost_;
    }
    if (aborted_) {
      result.status = ExactStatus::BudgetExceeded;
    } else {
      result.status = best_cost_ == kNone ? ExactStatus::ProvenInfeasible : ExactStatus::Optimal;
    }
    return result;
  }

 private:
  static constexpr std::int64_t kNone = std::numeric_limits<std::int64_t>::max();

  bool out_of_budget() {
    if (nodes_ >= limits_.max_nodes) return true;
    if ((nodes_ & 0x3FF) == 0 && std::chrono::steady_clock::now() - start_ > limits_.max_time) {
      return true;
    }
    return false;
  }

  bool cover_possible(int next) const {
    const Matrix<int>& supply = max_supply_[next];
    for (int k = 0; k < kSlots; ++k) {
      for (int s = 0; s < p_; ++s) {
        if (state_.residual(k, s) > supply(k, s)) return false;
      }
    }
    return true;
  }

  void search(int i, std::int64_t partial) {
    if (aborted_) return;
    ++nodes_;
    if (out_of_budget()) {
      aborted_ = true;
      return;
    }
    if (partial + min_suffix_[i] >= best_cost_) return;
    if (!cover_possible(i)) return;
    if (i == n_) {
      best_cost_ = partial;
      best_ = current_;
      return;
    }
    for (int j : order_[i]) {
      const std::int64_t c = partial + inst_.cost(i, j);
      // Candidates are cost-sorted, so the rest cannot beat the incumbent either.
      if (c + min_suffix_[i + 1] >= best_cost_) break;
      current_[i] = j;
      state_.apply(i, j, +1);
      search(i + 1, c);
      state_.apply(i, j, -1);
      if (aborted_) return;
    }
    current_[i] = -1;
  }

  const ProblemInstance& inst_;
  ExactLimits limits_;
  int n_;
  int p_;
  CoverState state_;
  std::vector<std::vector<int>> order_;
  std::vector<std::int64_t> min_suffix_;
  std::vector<Matrix<int>> max_supply_;
  std::vector<int> current_;
  std::vector<int> best_;
  std::int64_t best_cost_ = kNone;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

ExactResult exact_solve(const ProblemInstance& inst, const ExactLimits& limits) {
  return BranchAndBound(inst, limits).run();
}

}  // namespace roster
