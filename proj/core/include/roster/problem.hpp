#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace roster {

/// Slots 0..6 are days, 7..13 are nights.
inline constexpr int kSlots = 14;
inline constexpr int kDays = 7;

/// Raised for any structurally invalid instance, roster or argument.
class InstanceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  std::span<const T> row(int r) const {
    return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
  }
  std::span<const T> values() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

/// One week of work: which of the 14 day/night slots are covered.
class ShiftPattern {
 public:
  constexpr ShiftPattern() = default;

  static constexpr ShiftPattern from_bits(std::uint16_t mask) {
    ShiftPattern p;
    p.bits_ = mask & kAllSlots;
    return p;
  }
  /// Parses a 14-character string over {0,1}; first character is day 1.
  static ShiftPattern parse(std::string_view text);

  constexpr bool covers(int slot) const { return (bits_ >> slot) & 1U; }
  constexpr std::uint16_t bits() const { return bits_; }

  int day_count() const;
  int night_count() const;
  int total() const { return day_count() + night_count(); }

  bool is_day_only() const { return night_count() == 0; }
  bool is_night_only() const { return day_count() == 0; }
  bool is_combined() const { return day_count() > 0 && night_count() > 0; }

  std::string to_string() const;

  constexpr auto operator<=>(const ShiftPattern&) const = default;

 private:
  static constexpr std::uint16_t kAllSlots = (1U << kSlots) - 1U;
  std::uint16_t bits_ = 0;
};

enum class ContractType { Days, Nights, Both };

std::string_view to_string(ContractType type);
ContractType parse_contract_type(std::string_view text);

/// Shifts per week for the nurse's contract. Days and Nights take 0..7,
/// Both takes 0..14.
struct Contract {
  ContractType type = ContractType::Days;
  int shifts = 0;

  /// F(i) membership: the pattern is of the contract's kind and works the
  /// contracted number of shifts in the relevant half (or in total for Both).
  bool accepts(const ShiftPattern& pattern) const;

  bool operator==(const Contract&) const = default;
};

struct Nurse {
  int grade = 1;  ///< 1 is the highest grade.
  Contract contract;

  bool operator==(const Nurse&) const = default;
};

/// Indices of the patterns a nurse may work, in ascending order.
std::vector<int> feasible_patterns(const Nurse& nurse, std::span<const ShiftPattern> patterns);

/// Immutable problem data. Construction validates every dimension and
/// rejects nurses with an empty feasible set.
class ProblemInstance {
 public:
  ProblemInstance(int grade_count, std::vector<Nurse> nurses, std::vector<ShiftPattern> patterns,
                  Matrix<std::int64_t> pref_cost, Matrix<int> demand);

  int nurse_count() const { return static_cast<int>(nurses_.size()); }
  int pattern_count() const { return static_cast<int>(patterns_.size()); }
  int grade_count() const { return grade_count_; }

  const Nurse& nurse(int i) const { return nurses_[i]; }
  std::span<const Nurse> nurses() const { return nurses_; }
  const ShiftPattern& pattern(int j) const { return patterns_[j]; }
  std::span<const ShiftPattern> patterns() const { return patterns_; }

  std::int64_t cost(int nurse, int pattern) const { return pref_cost_(nurse, pattern); }
  const Matrix<std::int64_t>& pref_cost() const { return pref_cost_; }

  /// Demand for grade column `grade_col` (0-based, grade_col + 1 is the grade) on slot k.
  int demand(int slot, int grade_col) const { return demand_(slot, grade_col); }
  const Matrix<int>& demand() const { return demand_; }

  std::span<const int> feasible(int nurse) const { return feasible_[nurse]; }
  bool allows(int nurse, int pattern) const {
    return allowed_[static_cast<std::size_t>(nurse) * patterns_.size() + pattern] != 0;
  }

  /// q_is: nurse counts toward demand of grade column s when their grade is s+1 or higher.
  bool qualifies(int nurse, int grade_col) const { return nurses_[nurse].grade <= grade_col + 1; }

  /// Cheapest preference cost over F(i).
  std::int64_t min_cost(int nurse) const { return min_cost_[nurse]; }

  /// Mean of p_ij over all (i, j in F(i)) pairs.
  double mean_feasible_cost() const;

  bool operator==(const ProblemInstance& other) const;

 private:
  int grade_count_;
  std::vector<Nurse> nurses_;
  std::vector<ShiftPattern> patterns_;
  Matrix<std::int64_t> pref_cost_;
  Matrix<int> demand_;
  std::vector<std::vector<int>> feasible_;
  std::vector<char> allowed_;
  std::vector<std::int64_t> min_cost_;
};

/// One shift-pattern index per nurse.
struct Roster {
  std::vector<int> assignment;

  bool operator==(const Roster&) const = default;
};

/// A trial outcome: a finite cost or Infeasible, with Infeasible worst.
class ExtendedCost {
 public:
  static constexpr ExtendedCost feasible(std::int64_t cost) {
    if (cost < 0) throw InstanceError("feasible cost must be nonnegative");
    return ExtendedCost(cost);
  }
  static constexpr ExtendedCost infeasible() { return ExtendedCost(); }

  /// Accepts a nonnegative integer or the token "INF".
  static ExtendedCost parse(std::string_view text);

  constexpr bool is_feasible() const { return cost_ >= 0; }
  /// Only meaningful when is_feasible().
  constexpr std::int64_t cost() const { return cost_; }

  std::string to_string() const;

  constexpr std::strong_ordering operator<=>(const ExtendedCost& other) const {
    if (is_feasible() != other.is_feasible()) {
      return is_feasible() ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    return cost_ <=> other.cost_;
  }
  constexpr bool operator==(const ExtendedCost& other) const = default;

 private:
  constexpr ExtendedCost() = default;
  constexpr explicit ExtendedCost(std::int64_t cost) : cost_(cost) {}
  std::int64_t cost_ = -1;
};

/// Throws InstanceError unless every nurse has a pattern index in F(i).
void validate_roster(const ProblemInstance& inst, const Roster& r);

std::int64_t roster_cost(const ProblemInstance& inst, const Roster& r);

/// Supplied cover per (slot, grade column), counting grade substitution.
Matrix<int> coverage(const ProblemInstance& inst, const Roster& r);

/// max(R_ks - supplied_ks, 0) per (slot, grade column).
Matrix<int> coverage_shortfall(const ProblemInstance& inst, const Roster& r);

std::int64_t total_shortfall(const ProblemInstance& inst, const Roster& r);

bool is_feasible(const ProblemInstance& inst, const Roster& r);

/// roster_cost + w_demand * total shortfall.
double penalty_fitness(const ProblemInstance& inst, const Roster& r, double w_demand);

ExtendedCost extended_cost(const ProblemInstance& inst, const Roster& r);

/// Incrementally maintained cover for one roster. Lets local search and the
/// decoders price a single nurse's move without a full re-evaluation.
class CoverState {
 public:
  explicit CoverState(const ProblemInstance& inst);
  CoverState(const ProblemInstance& inst, const Roster& r);

  /// Adds (or removes, with sign -1) the cover of `pattern` worked by `nurse`.
  void apply(int nurse, int pattern, int sign = 1);

  int supplied(int slot, int grade_col) const { return supplied_(slot, grade_col); }
  int residual(int slot, int grade_col) const;
  std::int64_t shortfall() const { return shortfall_; }

  /// Change in total shortfall if `nurse` moved from pattern `from` to `to`.
  std::int64_t move_delta(int nurse, int from, int to) const;

 private:
  const ProblemInstance* inst_;
  Matrix<int> supplied_;
  std::int64_t shortfall_ = 0;
};

}  // namespace roster
