#include "roster/ga_indirect.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <numeric>
#include <string>

#include "evolution.hpp"

namespace roster {

NursePermutation NursePermutation::identity(int n) {
  NursePermutation p;
  p.order.resize(n);
  std::iota(p.order.begin(), p.order.end(), 0);
  return p;
}

bool NursePermutation::is_valid(int n) const {
  if (static_cast<int>(order.size()) != n) return false;
  std::vector<char> seen(n, 0);
  for (int v : order) {
    if (v < 0 || v >= n || seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

std::string_view to_string(DecoderMode mode) {
  switch (mode) {
    case DecoderMode::LowestCost: return "lowest_cost";
    case DecoderMode::MostUncovered: return "most_uncovered";
    case DecoderMode::Combined: return "combined";
  }
  return "?";
}

std::string_view to_string(DecoderBound bound) {
  switch (bound) {
    case DecoderBound::None: return "none";
    case DecoderBound::Greedy: return "greedy";
    case DecoderBound::LookAhead: return "look_ahead";
  }
  return "?";
}

DecoderMode parse_decoder_mode(std::string_view text) {
  for (auto m : {DecoderMode::LowestCost, DecoderMode::MostUncovered, DecoderMode::Combined}) {
    if (to_string(m) == text) return m;
  }
  throw InstanceError("unknown decoder mode \"" + std::string(text) + "\"");
}

DecoderBound parse_decoder_bound(std::string_view text) {
  for (auto b : {DecoderBound::None, DecoderBound::Greedy, DecoderBound::LookAhead}) {
    if (to_string(b) == text) return b;
  }
  throw InstanceError("unknown decoder bound \"" + std::string(text) + "\"");
}

DecoderConfig DecoderConfig::resolved(const ProblemInstance& inst) const {
  DecoderConfig out = *this;
  if (!out.w_cover) out.w_cover = std::max(1.0, inst.mean_feasible_cost());
  if (!(*out.w_cover >= 0.0) || !(out.w_cost >= 0.0)) {
    throw InstanceError("decoder weights must be nonnegative");
  }
  if (out.mode == DecoderMode::Combined && (*out.w_cover <= 0.0 || out.w_cost <= 0.0)) {
    throw InstanceError("combined decoder needs positive w_cover and w_cost");
  }
  return out;
}

namespace {

/// Decoder with per-instance tables built once and reused across decodes.
/// Residual demand and availability live in flat slot-major arrays.
class Decoder {
 public:
  explicit Decoder(const ProblemInstance& inst) : inst_(inst), p_(inst.grade_count()) {
    const int n = inst.nurse_count();
    can_cover_.assign(n, 0);
    for (int i = 0; i < n; ++i) {
      std::uint16_t mask = 0;
      for (int j : inst.feasible(i)) mask |= inst.pattern(j).bits();
      can_cover_[i] = mask;
    }
    all_available_.assign(static_cast<std::size_t>(kSlots) * p_, 0);
    for (int i = 0; i < n; ++i) adjust(all_available_, i, +1);
    demand_.assign(inst.demand().values().begin(), inst.demand().values().end());
  }

  /// Decoded roster; `shortfall`, when given, receives its total shortfall.
  Roster operator()(const NursePermutation& perm, const DecoderConfig& dcfg,
                    std::int64_t* shortfall = nullptr) const {
    const int n = inst_.nurse_count();
    const double w_cover = dcfg.w_cover.value_or(1.0);
    const bool look_ahead = dcfg.bound == DecoderBound::LookAhead;

    Roster r;
    r.assignment.assign(n, -1);
    std::vector<int> residual = demand_;
    std::vector<int> available;
    if (look_ahead) available = all_available_;

    for (int i : perm.order) {
      if (look_ahead) adjust(available, i, -1);
      const int first = inst_.nurse(i).grade - 1;
      int best = -1;
      double best_score = 0.0;
      for (int j : inst_.feasible(i)) {
        int units = 0;
        int critical = 0;
        for (unsigned m = inst_.pattern(j).bits(); m != 0; m &= m - 1) {
          const int base = std::countr_zero(m) * p_;
          for (int s = first; s < p_; ++s) {
            const int res = residual[base + s];
            if (res <= 0) continue;
            ++units;
            if (look_ahead && res > available[base + s]) ++critical;
          }
        }
        const double cost = static_cast<double>(inst_.cost(i, j));
        double score = 0.0;
        switch (dcfg.mode) {
          case DecoderMode::LowestCost: score = -cost; break;
          case DecoderMode::MostUncovered: score = units; break;
          case DecoderMode::Combined: score = w_cover * units - dcfg.w_cost * cost; break;
        }
        score += w_cover * critical;
        if (best < 0 || score > best_score ||
            (score == best_score && inst_.cost(i, j) < inst_.cost(i, best))) {
          best = j;
          best_score = score;
        }
      }
      r.assignment[i] = best;
      for (unsigned m = inst_.pattern(best).bits(); m != 0; m &= m - 1) {
        const int base = std::countr_zero(m) * p_;
        for (int s = first; s < p_; ++s) --residual[base + s];
      }
    }
    if (shortfall) {
      *shortfall = 0;
      for (int v : residual) *shortfall += std::max(v, 0);
    }
    return r;
  }

 private:
  void adjust(std::vector<int>& available, int nurse, int sign) const {
    const int first = inst_.nurse(nurse).grade - 1;
    for (unsigned m = can_cover_[nurse]; m != 0; m &= m - 1) {
      const int base = std::countr_zero(m) * p_;
      for (int s = first; s < p_; ++s) available[base + s] += sign;
    }
  }

  const ProblemInstance& inst_;
  int p_;
  std::vector<std::uint16_t> can_cover_;
  std::vector<int> all_available_;
  std::vector<int> demand_;
};

/// Fills the unset (-1) positions of `child` with `other`'s elements in order.
NursePermutation fill_from(std::vector<int> child, const NursePermutation& other) {
  const std::size_t n = child.size();
  std::vector<char> used(n, 0);
  for (int v : child) {
    if (v >= 0) used[v] = 1;
  }
  std::size_t pos = 0;
  for (int v : other.order) {
    if (used[v]) continue;
    while (pos < n && child[pos] >= 0) ++pos;
    child[pos] = v;
  }
  return NursePermutation{std::move(child)};
}

std::pair<std::size_t, std::size_t> random_segment(std::size_t n, Rng& rng) {
  std::size_t a = rng.below(n);
  std::size_t b = rng.below(n);
  if (b < a) std::swap(a, b);
  return {a, b};
}

}  // namespace

Roster decode(const NursePermutation& perm, const ProblemInstance& inst, const DecoderConfig& dcfg) {
  if (!perm.is_valid(inst.nurse_count())) throw InstanceError("decode: not a permutation of the nurses");
  return Decoder(inst)(perm, dcfg.resolved(inst));
}

NursePermutation order_crossover_segment(const NursePermutation& fitter,
                                         const NursePermutation& other, std::size_t lo,
                                         std::size_t hi) {
  std::vector<int> child(fitter.order.size(), -1);
  for (std::size_t t = lo; t <= hi && t < child.size(); ++t) child[t] = fitter.order[t];
  return fill_from(std::move(child), other);
}

NursePermutation order_crossover(const NursePermutation& fitter, const NursePermutation& other,
                                 Rng& rng) {
  if (fitter.order.size() < 2) return fitter;
  const auto [lo, hi] = random_segment(fitter.order.size(), rng);
  return order_crossover_segment(fitter, other, lo, hi);
}

NursePermutation two_point_order_crossover(const NursePermutation& fitter,
                                           const NursePermutation& other, Rng& rng) {
  if (fitter.order.size() < 2) return fitter;
  const auto [lo, hi] = random_segment(fitter.order.size(), rng);
  std::vector<int> child = fitter.order;
  for (std::size_t t = lo; t <= hi; ++t) child[t] = -1;
  return fill_from(std::move(child), other);
}

NursePermutation uniform_order_crossover(const NursePermutation& fitter,
                                         const NursePermutation& other, double bias, Rng& rng) {
  std::vector<int> child = fitter.order;
  for (auto& v : child) {
    if (!rng.bernoulli(bias)) v = -1;
  }
  return fill_from(std::move(child), other);
}

NursePermutation one_point_order_crossover(const NursePermutation& fitter,
                                           const NursePermutation& other, Rng& rng) {
  const std::size_t n = fitter.order.size();
  if (n < 2) return fitter;
  const std::size_t cut = 1 + rng.below(n - 1);
  std::vector<int> child = fitter.order;
  for (std::size_t t = cut; t < n; ++t) child[t] = -1;
  return fill_from(std::move(child), other);
}

void swap_mutation(NursePermutation& perm, double rate, Rng& rng) {
  const std::size_t n = perm.order.size();
  if (n < 2 || !rng.bernoulli(rate)) return;
  const std::size_t a = rng.below(n);
  std::size_t b = rng.below(n - 1);
  if (b >= a) ++b;
  std::swap(perm.order[a], perm.order[b]);
}

namespace {

class IndirectPolicy {
 public:
  IndirectPolicy(const ProblemInstance& inst, const GaConfig& cfg, const DecoderConfig& dcfg)
      : inst_(inst), cfg_(cfg), dcfg_(dcfg.resolved(inst)), decoder_(inst) {
    if (cfg.hillclimber) throw InstanceError("indirect GA has no hillclimber");
  }

  NursePermutation random(Rng& rng) const {
    auto p = NursePermutation::identity(inst_.nurse_count());
    rng.shuffle(std::span<int>(p.order));
    return p;
  }

  void evaluate(detail::Individual<NursePermutation>& ind) const {
    std::int64_t shortfall = 0;
    ind.roster = decoder_(ind.genome, dcfg_, &shortfall);
    ind.cost = 0;
    for (int i = 0; i < inst_.nurse_count(); ++i) ind.cost += inst_.cost(i, ind.roster.assignment[i]);
    ind.feasible = shortfall == 0;
    ind.fitness = static_cast<double>(ind.cost) +
                  (shortfall == 0 ? 0.0 : cfg_.w_demand * static_cast<double>(shortfall));
  }

  NursePermutation crossover(const NursePermutation& a, const NursePermutation& b,
                             const detail::Parents& parents, Rng& rng) {
    switch (cfg_.crossover.kind) {
      case CrossoverKind::Uniform: return uniform_order_crossover(a, b, cfg_.crossover.bias, rng);
      case CrossoverKind::OnePoint: return one_point_order_crossover(a, b, rng);
      case CrossoverKind::Order: return order_crossover(a, b, rng);
      case CrossoverKind::Automatic:
        return active_ == 0 ? order_crossover(a, b, rng) : two_point_order_crossover(a, b, rng);
      case CrossoverKind::RankBiased: {
        const double wa = linear_ranking_weight(parents.rank_fitter, parents.size);
        const double wb = linear_ranking_weight(parents.rank_other, parents.size);
        return uniform_order_crossover(a, b, wa / (wa + wb), rng);
      }
      case CrossoverKind::FitnessBiased: {
        const double sum = parents.fitness_fitter + parents.fitness_other;
        return uniform_order_crossover(a, b, sum > 0.0 ? parents.fitness_other / sum : 0.5, rng);
      }
    }
    return a;
  }

  void mutate(NursePermutation& p, Rng& rng) const { swap_mutation(p, cfg_.mutation_rate, rng); }

  bool improve(NursePermutation&) const { return false; }

  void offspring(double child, double parents_mean) {
    if (cfg_.crossover.kind != CrossoverKind::Automatic) return;
    trials_[active_] += 1.0;
    if (child < parents_mean) successes_[active_] += 1.0;
  }

  // Epsilon-greedy pick of the operator with the better recent success rate.
  void begin_generation(Rng& rng) {
    if (cfg_.crossover.kind != CrossoverKind::Automatic) return;
    for (int op = 0; op < 2; ++op) {
      trials_[op] *= kDecay;
      successes_[op] *= kDecay;
    }
    if (rng.bernoulli(kExplore)) {
      active_ = static_cast<int>(rng.below(2));
      return;
    }
    auto rate = [&](int op) { return trials_[op] > 0.0 ? successes_[op] / trials_[op] : 0.5; };
    active_ = rate(1) > rate(0) ? 1 : 0;
  }

  bool end_generation(bool best_feasible) {
    if (!cfg_.auto_weights) return false;
    const double w = *dcfg_.w_cover * (best_feasible ? kShrink : kGrow);
    dcfg_.w_cover = std::clamp(w, kMinCover, kMaxCover);
    return true;
  }

 private:
  static constexpr double kDecay = 0.5;
  static constexpr double kExplore = 0.1;
  static constexpr double kGrow = 1.1;
  static constexpr double kShrink = 0.95;
  static constexpr double kMinCover = 1.0;
  static constexpr double kMaxCover = 1e4;

  const ProblemInstance& inst_;
  const GaConfig& cfg_;
  DecoderConfig dcfg_;
  Decoder decoder_;
  int active_ = 0;
  std::array<double, 2> trials_{};
  std::array<double, 2> successes_{};
};

}  // namespace

TrialResult run_indirect_ga(const ProblemInstance& inst, const GaConfig& cfg,
                            const DecoderConfig& dcfg) {
  IndirectPolicy policy(inst, cfg, dcfg);
  return detail::evolve<NursePermutation>(cfg, policy);
}

}  // namespace roster
