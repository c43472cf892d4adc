#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roster/problem.hpp"

namespace roster {

/// Outcomes of K seeded trials of one algorithm on one instance.
struct TrialSet {
  std::string algorithm;
  std::string instance;
  std::vector<ExtendedCost> costs;
};

/// Pairwise trial-vs-trial score from the point of view of `ci`.
///   +1 / -1     feasible against Infeasible
///   +alpha / -alpha  strictly better / worse feasible cost
///   0           equal, including Infeasible against Infeasible
/// alpha = 1 gives the plain win/tie/loss score.
double pair_D(const ExtendedCost& ci, const ExtendedCost& cj, double alpha);

/// Counts over all K x L trial pairs.
struct PairTally {
  long beats_infeasible = 0;  ///< feasible vs Infeasible
  long better = 0;            ///< both feasible, strictly lower cost
  long ties = 0;
  long worse = 0;
  long loses_to_feasible = 0;  ///< Infeasible vs feasible

  long total() const { return beats_infeasible + better + ties + worse + loses_to_feasible; }
  long wins() const { return beats_infeasible + better; }
  long losses() const { return worse + loses_to_feasible; }
  /// Mean of pair_D over all pairs.
  double mean_score(double alpha) const;
};

PairTally tally_pairs(const TrialSet& a, const TrialSet& b);

/// Mean pairwise score of `a` against `b`; in [-1, 1], antisymmetric.
double compute_E(const TrialSet& a, const TrialSet& b, double alpha);

/// E values for every ordered pair of algorithms on one instance.
struct EMatrix {
  std::string instance;
  std::vector<std::string> algorithms;
  Matrix<double> values;
};

EMatrix build_e_matrix(std::span<const TrialSet> trial_sets, double alpha);

/// sum over j != i of sign(E_ij).
std::vector<double> copeland_scores(const EMatrix& e);

/// Ascending mid-ranks: the lowest score gets rank 1, ties share the mean
/// of the positions they span.
std::vector<double> mid_ranks(std::span<const double> scores);

/// Per-instance ranks from Copeland scores; K = best, 1 = worst.
std::vector<double> rank_instance(std::span<const TrialSet> trial_sets, double alpha);

/// Triples (a, b, c) with a > b > c > a under E > 0; each cycle reported once.
std::vector<std::array<int, 3>> intransitive_triples(const EMatrix& e);

enum class Sidedness { TwoSided, UpperTail };

struct TestOutcome {
  std::string test;
  std::map<std::string, double> statistics;
  int n = 0;
  std::optional<double> z;
  bool exact = false;
  double p_value = 1.0;
  Sidedness sidedness = Sidedness::TwoSided;
  /// No informative data (all zero differences, all ties).
  bool degenerate = false;

  bool significant(double level = 0.05) const { return !degenerate && p_value < level; }
};

struct FriedmanResult {
  TestOutcome outcome;
  std::vector<double> average_ranks;
};

/// Tie-corrected Friedman test. Rows are blocks (instances), columns are
/// treatments (algorithms); every row must be a mid-rank vector over 1..K.
/// A matrix whose rows are all fully tied gives S = 0, p = 1.
FriedmanResult friedman(const Matrix<double>& ranks);

/// Signed-rank test with zeros dropped, mid-ranks for tied magnitudes and
/// the plain normal approximation (no continuity or tie-variance term).
TestOutcome wilcoxon_signed_rank(std::span<const double> values);

/// Exact two-sided sign test on the nonzero values.
TestOutcome sign_test(std::span<const double> values);

struct PairwiseComparison {
  std::string first;
  std::string second;
  /// E(first, second) per instance, in instance order.
  std::vector<double> e_values;
  TestOutcome wilcoxon;
  TestOutcome sign;
};

struct ComparisonReport {
  double alpha = 1.0;
  std::vector<std::string> algorithms;
  std::vector<std::string> instances;
  std::vector<EMatrix> e_matrices;
  /// instances x algorithms mid-ranks.
  Matrix<double> ranks;
  std::vector<double> average_ranks;
  /// Absent with fewer than two algorithms or two instances.
  std::optional<FriedmanResult> friedman;
  std::vector<PairwiseComparison> pairwise;
  /// (instance index, triple) for every intransitive E relation found.
  std::vector<std::pair<int, std::array<int, 3>>> cycles;

  /// Algorithms best first by average rank.
  std::vector<std::string> ordering() const;
};

/// Full analysis at one alpha. Algorithms and instances keep their order of
/// first appearance. Throws InstanceError naming any missing
/// (algorithm, instance) cell or duplicate cell.
ComparisonReport overall_comparison(std::span<const TrialSet> trial_sets, double alpha);

std::vector<ComparisonReport> overall_comparison(std::span<const TrialSet> trial_sets,
                                                 std::span<const double> alphas);

/// Whether two reports reach the same conclusions: identical rank rows and
/// the same significant / not-significant verdict for every pair and test.
bool same_conclusions(const ComparisonReport& a, const ComparisonReport& b, double level = 0.05);

nlohmann::json to_json(const TestOutcome& outcome);
nlohmann::json to_json(const ComparisonReport& report);
/// Aligned-column text rendering.
std::string to_text(const ComparisonReport& report);

}  // namespace roster
