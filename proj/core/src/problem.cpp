#include "roster/problem.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <numeric>

namespace roster {

namespace {

constexpr std::uint16_t kDayMask = (1U << kDays) - 1U;
constexpr std::uint16_t kNightMask = static_cast<std::uint16_t>(kDayMask << kDays);

std::string where(int nurse) { return "nurse " + std::to_string(nurse); }

}  // namespace

ShiftPattern ShiftPattern::parse(std::string_view text) {
  if (text.size() != static_cast<std::size_t>(kSlots)) {
    throw InstanceError("shift pattern must have 14 characters, got \"" + std::string(text) + "\"");
  }
  std::uint16_t mask = 0;
  for (int k = 0; k < kSlots; ++k) {
    if (text[k] == '1') {
      mask |= static_cast<std::uint16_t>(1U << k);
    } else if (text[k] != '0') {
      throw InstanceError("shift pattern may only contain 0 and 1, got \"" + std::string(text) + "\"");
    }
  }
  return from_bits(mask);
}

int ShiftPattern::day_count() const { return std::popcount(static_cast<unsigned>(bits_ & kDayMask)); }

int ShiftPattern::night_count() const {
  return std::popcount(static_cast<unsigned>(bits_ & kNightMask));
}

std::string ShiftPattern::to_string() const {
  std::string s(kSlots, '0');
  for (int k = 0; k < kSlots; ++k) {
    if (covers(k)) s[k] = '1';
  }
  return s;
}

std::string_view to_string(ContractType type) {
  switch (type) {
    case ContractType::Days: return "days";
    case ContractType::Nights: return "nights";
    case ContractType::Both: return "both";
  }
  return "?";
}

ContractType parse_contract_type(std::string_view text) {
  if (text == "days") return ContractType::Days;
  if (text == "nights") return ContractType::Nights;
  if (text == "both") return ContractType::Both;
  throw InstanceError("unknown contract type \"" + std::string(text) + "\"");
}

bool Contract::accepts(const ShiftPattern& pattern) const {
  switch (type) {
    case ContractType::Days: return pattern.is_day_only() && pattern.day_count() == shifts;
    case ContractType::Nights: return pattern.is_night_only() && pattern.night_count() == shifts;
    case ContractType::Both: return pattern.is_combined() && pattern.total() == shifts;
  }
  return false;
}

std::vector<int> feasible_patterns(const Nurse& nurse, std::span<const ShiftPattern> patterns) {
  std::vector<int> out;
  for (std::size_t j = 0; j < patterns.size(); ++j) {
    if (nurse.contract.accepts(patterns[j])) out.push_back(static_cast<int>(j));
  }
  return out;
}

ProblemInstance::ProblemInstance(int grade_count, std::vector<Nurse> nurses,
                                 std::vector<ShiftPattern> patterns, Matrix<std::int64_t> pref_cost,
                                 Matrix<int> demand)
    : grade_count_(grade_count),
      nurses_(std::move(nurses)),
      patterns_(std::move(patterns)),
      pref_cost_(std::move(pref_cost)),
      demand_(std::move(demand)) {
  if (grade_count_ < 1) throw InstanceError("grade count must be at least 1");
  if (nurses_.empty()) throw InstanceError("instance has no nurses");
  if (patterns_.empty()) throw InstanceError("instance has no shift patterns");
  const int n = nurse_count();
  const int m = pattern_count();
  if (pref_cost_.rows() != n || pref_cost_.cols() != m) {
    throw InstanceError("pref_cost must be " + std::to_string(n) + "x" + std::to_string(m) +
                        ", got " + std::to_string(pref_cost_.rows()) + "x" +
                        std::to_string(pref_cost_.cols()));
  }
  if (demand_.rows() != kSlots || demand_.cols() != grade_count_) {
    throw InstanceError("demand must be 14x" + std::to_string(grade_count_) + ", got " +
                        std::to_string(demand_.rows()) + "x" + std::to_string(demand_.cols()));
  }
  for (auto c : pref_cost_.values()) {
    if (c < 0) throw InstanceError("preference costs must be nonnegative");
  }
  for (auto d : demand_.values()) {
    if (d < 0) throw InstanceError("demand entries must be nonnegative");
  }

  allowed_.assign(static_cast<std::size_t>(n) * m, 0);
  feasible_.reserve(n);
  min_cost_.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Nurse& nurse = nurses_[i];
    if (nurse.grade < 1 || nurse.grade > grade_count_) {
      throw InstanceError(where(i) + ": grade " + std::to_string(nurse.grade) + " outside 1.." +
                          std::to_string(grade_count_));
    }
    const int max_shifts = nurse.contract.type == ContractType::Both ? kSlots : kDays;
    if (nurse.contract.shifts < 0 || nurse.contract.shifts > max_shifts) {
      throw InstanceError(where(i) + ": contract shift count " +
                          std::to_string(nurse.contract.shifts) + " out of range");
    }
    auto fi = feasible_patterns(nurse, patterns_);
    if (fi.empty()) {
      throw InstanceError(where(i) + ": no shift pattern in the catalog matches contract " +
                          std::string(to_string(nurse.contract.type)) + "(" +
                          std::to_string(nurse.contract.shifts) + ")");
    }
    std::int64_t best = pref_cost_(i, fi.front());
    for (int j : fi) {
      allowed_[static_cast<std::size_t>(i) * m + j] = 1;
      best = std::min(best, pref_cost_(i, j));
    }
    min_cost_.push_back(best);
    feasible_.push_back(std::move(fi));
  }
}

double ProblemInstance::mean_feasible_cost() const {
  double sum = 0.0;
  std::size_t count = 0;
  for (int i = 0; i < nurse_count(); ++i) {
    for (int j : feasible_[i]) {
      sum += static_cast<double>(pref_cost_(i, j));
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

bool ProblemInstance::operator==(const ProblemInstance& other) const {
  return grade_count_ == other.grade_count_ && nurses_ == other.nurses_ &&
         patterns_ == other.patterns_ && pref_cost_ == other.pref_cost_ &&
         demand_ == other.demand_;
}

ExtendedCost ExtendedCost::parse(std::string_view text) {
  if (text == "INF") return infeasible();
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end || value < 0) {
    throw InstanceError("cost must be a nonnegative integer or INF, got \"" + std::string(text) +
                        "\"");
  }
  return feasible(value);
}

std::string ExtendedCost::to_string() const {
  return is_feasible() ? std::to_string(cost_) : std::string("INF");
}

void validate_roster(const ProblemInstance& inst, const Roster& r) {
  if (static_cast<int>(r.assignment.size()) != inst.nurse_count()) {
    throw InstanceError("roster has " + std::to_string(r.assignment.size()) + " entries, expected " +
                        std::to_string(inst.nurse_count()));
  }
  for (int i = 0; i < inst.nurse_count(); ++i) {
    const int j = r.assignment[i];
    if (j < 0 || j >= inst.pattern_count()) {
      throw InstanceError(where(i) + ": pattern index " + std::to_string(j) + " out of range");
    }
    if (!inst.allows(i, j)) {
      throw InstanceError(where(i) + ": pattern " + std::to_string(j) + " is not in F(i)");
    }
  }
}

std::int64_t roster_cost(const ProblemInstance& inst, const Roster& r) {
  validate_roster(inst, r);
  std::int64_t total = 0;
  for (int i = 0; i < inst.nurse_count(); ++i) total += inst.cost(i, r.assignment[i]);
  return total;
}

Matrix<int> coverage(const ProblemInstance& inst, const Roster& r) {
  validate_roster(inst, r);
  CoverState state(inst, r);
  Matrix<int> out(kSlots, inst.grade_count());
  for (int k = 0; k < kSlots; ++k) {
    for (int s = 0; s < inst.grade_count(); ++s) out(k, s) = state.supplied(k, s);
  }
  return out;
}

Matrix<int> coverage_shortfall(const ProblemInstance& inst, const Roster& r) {
  const Matrix<int> supplied = coverage(inst, r);
  Matrix<int> out(kSlots, inst.grade_count());
  for (int k = 0; k < kSlots; ++k) {
    for (int s = 0; s < inst.grade_count(); ++s) {
      out(k, s) = std::max(inst.demand(k, s) - supplied(k, s), 0);
    }
  }
  return out;
}

std::int64_t total_shortfall(const ProblemInstance& inst, const Roster& r) {
  const auto m = coverage_shortfall(inst, r);
  return std::accumulate(m.values().begin(), m.values().end(), std::int64_t{0});
}

bool is_feasible(const ProblemInstance& inst, const Roster& r) { return total_shortfall(inst, r) == 0; }

double penalty_fitness(const ProblemInstance& inst, const Roster& r, double w_demand) {
  if (!(w_demand >= 0.0)) throw InstanceError("w_demand must be nonnegative");
  const std::int64_t cost = roster_cost(inst, r);
  const std::int64_t shortfall = total_shortfall(inst, r);
  if (shortfall == 0) return static_cast<double>(cost);
  return static_cast<double>(cost) + w_demand * static_cast<double>(shortfall);
}

ExtendedCost extended_cost(const ProblemInstance& inst, const Roster& r) {
  return is_feasible(inst, r) ? ExtendedCost::feasible(roster_cost(inst, r)) : ExtendedCost::infeasible();
}

CoverState::CoverState(const ProblemInstance& inst)
    : inst_(&inst), supplied_(kSlots, inst.grade_count()) {
  for (auto d : inst.demand().values()) shortfall_ += d;
}

CoverState::CoverState(const ProblemInstance& inst, const Roster& r) : CoverState(inst) {
  for (int i = 0; i < inst.nurse_count(); ++i) apply(i, r.assignment[i]);
}

int CoverState::residual(int slot, int grade_col) const {
  return std::max(inst_->demand(slot, grade_col) - supplied_(slot, grade_col), 0);
}

void CoverState::apply(int nurse, int pattern, int sign) {
  const ShiftPattern& pat = inst_->pattern(pattern);
  const int first = inst_->nurse(nurse).grade - 1;
  for (int k = 0; k < kSlots; ++k) {
    if (!pat.covers(k)) continue;
    for (int s = first; s < inst_->grade_count(); ++s) {
      const int before = residual(k, s);
      supplied_(k, s) += sign;
      shortfall_ += residual(k, s) - before;
    }
  }
}

std::int64_t CoverState::move_delta(int nurse, int from, int to) const {
  if (from == to) return 0;
  const ShiftPattern& a = inst_->pattern(from);
  const ShiftPattern& b = inst_->pattern(to);
  const int first = inst_->nurse(nurse).grade - 1;
  std::int64_t delta = 0;
  for (int k = 0; k < kSlots; ++k) {
    const bool lose = a.covers(k) && !b.covers(k);
    const bool gain = b.covers(k) && !a.covers(k);
    if (!lose && !gain) continue;
    for (int s = first; s < inst_->grade_count(); ++s) {
      const int have = supplied_(k, s);
      const int need = inst_->demand(k, s);
      if (lose && have <= need) ++delta;
      if (gain && have < need) --delta;
    }
  }
  return delta;
}

}  // namespace roster
