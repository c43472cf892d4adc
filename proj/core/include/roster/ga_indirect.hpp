#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "roster/ga.hpp"
#include "roster/problem.hpp"
#include "roster/rng.hpp"

namespace roster {

/// An order in which the decoder visits nurses.
struct NursePermutation {
  std::vector<int> order;

  static NursePermutation identity(int n);
  bool is_valid(int n) const;
  bool operator==(const NursePermutation&) const = default;
};

enum class DecoderMode { LowestCost, MostUncovered, Combined };
enum class DecoderBound { None, Greedy, LookAhead };

std::string_view to_string(DecoderMode mode);
std::string_view to_string(DecoderBound bound);
DecoderMode parse_decoder_mode(std::string_view text);
DecoderBound parse_decoder_bound(std::string_view text);

struct DecoderConfig {
  DecoderMode mode = DecoderMode::Combined;
  /// Unset means the instance's mean feasible preference cost (at least 1).
  std::optional<double> w_cover;
  double w_cost = 1.0;
  DecoderBound bound = DecoderBound::None;

  /// Copy with w_cover filled in for this instance; validates weights.
  DecoderConfig resolved(const ProblemInstance& inst) const;
};

/// Greedy decoder. Nurses are taken in permutation order; each gets the
/// pattern in F(i) with the highest score against the residual demand:
///   LowestCost     -p_ij
///   MostUncovered  residual units covered
///   Combined       w_cover * units covered - w_cost * p_ij
/// LookAhead adds w_cover for every covered (slot, grade) whose residual
/// demand exceeds the number of still-unscheduled nurses able to cover it.
/// This criticality bonus is a stand-in for the original look-ahead bound.
/// Ties go to the lower cost, then the lower index.
Roster decode(const NursePermutation& perm, const ProblemInstance& inst, const DecoderConfig& dcfg);

/// Indirect GA over nurse orderings; fitness is the penalty fitness of the
/// decoded roster.
TrialResult run_indirect_ga(const ProblemInstance& inst, const GaConfig& cfg,
                            const DecoderConfig& dcfg);

/// OX1: keep a random segment of `fitter`, fill the other positions left to
/// right with `other`'s remaining elements in `other`'s order.
NursePermutation order_crossover(const NursePermutation& fitter, const NursePermutation& other,
                                 Rng& rng);
/// OX1 with a fixed inclusive segment [lo, hi].
NursePermutation order_crossover_segment(const NursePermutation& fitter,
                                         const NursePermutation& other, std::size_t lo,
                                         std::size_t hi);

/// Complement of OX1: keep `fitter` outside [lo, hi] and refill the inside in
/// `other`'s order.
NursePermutation two_point_order_crossover(const NursePermutation& fitter,
                                           const NursePermutation& other, Rng& rng);

/// Keep each position of `fitter` with probability `bias`, refill the rest in
/// `other`'s order.
NursePermutation uniform_order_crossover(const NursePermutation& fitter,
                                         const NursePermutation& other, double bias, Rng& rng);

/// Prefix of `fitter` up to a uniform cut in 1..n-1, rest in `other`'s order.
NursePermutation one_point_order_crossover(const NursePermutation& fitter,
                                           const NursePermutation& other, Rng& rng);

/// With probability `rate` swaps two distinct uniformly chosen positions.
void swap_mutation(NursePermutation& perm, double rate, Rng& rng);

}  // namespace roster
