#include "roster/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace roster {

namespace {

// Absolute tolerance for treating a computed value as zero or two magnitudes
// as tied. E values are multiples of alpha/(K*L), far above this.
constexpr double kTolerance = 1e-12;

int sign_of(double x) {
  if (x > kTolerance) return 1;
  if (x < -kTolerance) return -1;
  return 0;
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InstanceError("alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string signed_fixed(double v, int digits) {
  return (v > 0 ? "+" : "") + fixed(v, digits);
}

}  // namespace

double pair_D(const ExtendedCost& ci, const ExtendedCost& cj, double alpha) {
  check_alpha(alpha);
  if (ci.is_feasible() && !cj.is_feasible()) return 1.0;
  if (!ci.is_feasible() && cj.is_feasible()) return -1.0;
  if (!ci.is_feasible()) return 0.0;
  if (ci.cost() < cj.cost()) return alpha;
  if (ci.cost() > cj.cost()) return -alpha;
  return 0.0;
}

double PairTally::mean_score(double alpha) const {
  check_alpha(alpha);
  const long n = total();
  if (n == 0) return 0.0;
  const double num = static_cast<double>(beats_infeasible - loses_to_feasible) +
                     alpha * static_cast<double>(better - worse);
  return num / static_cast<double>(n);
}

PairTally tally_pairs(const TrialSet& a, const TrialSet& b) {
  PairTally t;
  for (const auto& x : a.costs) {
    for (const auto& y : b.costs) {
      if (x.is_feasible() && !y.is_feasible()) {
        ++t.beats_infeasible;
      } else if (!x.is_feasible() && y.is_feasible()) {
        ++t.loses_to_feasible;
      } else if (x < y) {
        ++t.better;
      } else if (y < x) {
        ++t.worse;
      } else {
        ++t.ties;
      }
    }
  }
  return t;
}

double compute_E(const TrialSet& a, const TrialSet& b, double alpha) {
  check_alpha(alpha);
  if (a.instance != b.instance) {
    throw InstanceError("compute_E: trial sets are for different instances (\"" + a.instance +
                        "\" vs \"" + b.instance + "\")");
  }
  if (a.costs.empty() || b.costs.empty()) throw InstanceError("compute_E: empty trial set");
  return tally_pairs(a, b).mean_score(alpha);
}

EMatrix build_e_matrix(std::span<const TrialSet> trial_sets, double alpha) {
  EMatrix e;
  const int k = static_cast<int>(trial_sets.size());
  e.instance = trial_sets.empty() ? std::string() : trial_sets.front().instance;
  for (const auto& ts : trial_sets) e.algorithms.push_back(ts.algorithm);
  e.values = Matrix<double>(k, k, 0.0);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const double v = compute_E(trial_sets[i], trial_sets[j], alpha);
      e.values(i, j) = v;
      e.values(j, i) = -v;
    }
  }
  return e;
}

std::vector<double> copeland_scores(const EMatrix& e) {
  const int k = e.values.rows();
  std::vector<double> scores(k, 0.0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i != j) scores[i] += sign_of(e.values(i, j));
    }
  }
  return scores;
}

std::vector<double> mid_ranks(std::span<const double> scores) {
  const std::size_t k = scores.size();
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  std::vector<double> ranks(k);
  for (std::size_t lo = 0; lo < k;) {
    std::size_t hi = lo;
    while (hi + 1 < k && std::abs(scores[idx[hi + 1]] - scores[idx[lo]]) <= kTolerance) ++hi;
    const double rank = 0.5 * static_cast<double>(lo + hi) + 1.0;
    for (std::size_t t = lo; t <= hi; ++t) ranks[idx[t]] = rank;
    lo = hi + 1;
  }
  return ranks;
}

std::vector<double> rank_instance(std::span<const TrialSet> trial_sets, double alpha) {
  const auto e = build_e_matrix(trial_sets, alpha);
  const auto scores = copeland_scores(e);
  return mid_ranks(scores);
}

std::vector<std::array<int, 3>> intransitive_triples(const EMatrix& e) {
  const int k = e.values.rows();
  auto beats = [&](int a, int b) { return sign_of(e.values(a, b)) > 0; };
  std::vector<std::array<int, 3>> out;
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      for (int c = a + 1; c < k; ++c) {
        // Smallest index first so each cycle appears once.
        if (c == b) continue;
        if (beats(a, b) && beats(b, c) && beats(c, a)) out.push_back({a, b, c});
      }
    }
  }
  return out;
}

FriedmanResult friedman(const Matrix<double>& ranks) {
  const int blocks = ranks.rows();
  const int k = ranks.cols();
  if (blocks < 2) throw InstanceError("friedman: need at least 2 blocks");
  if (k < 2) throw InstanceError("friedman: need at least 2 treatments");
  const double expected_row_sum = k * (k + 1) / 2.0;
  for (int b = 0; b < blocks; ++b) {
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      const double r = ranks(b, j);
      if (r < 1.0 - kTolerance || r > k + kTolerance) {
        throw InstanceError("friedman: rank outside 1..K in row " + std::to_string(b));
      }
      sum += r;
    }
    if (std::abs(sum - expected_row_sum) > 1e-9) {
      throw InstanceError("friedman: row " + std::to_string(b) + " is not a mid-rank vector");
    }
  }

  FriedmanResult result;
  result.average_ranks.assign(k, 0.0);
  std::vector<double> rank_sums(k, 0.0);
  double sum_sq = 0.0;
  for (int b = 0; b < blocks; ++b) {
    for (int j = 0; j < k; ++j) {
      rank_sums[j] += ranks(b, j);
      sum_sq += ranks(b, j) * ranks(b, j);
    }
  }
  for (int j = 0; j < k; ++j) result.average_ranks[j] = rank_sums[j] / blocks;

  // Tie-corrected form: (K-1) * (sum_j R_j^2 - P C) / (sum r^2 - C) with
  // C = P K (K+1)^2 / 4 and R_j the column rank sums. Reduces to the textbook
  // 12 / (P K (K+1)) sum R_j^2 - 3 P (K+1) when there are no ties.
  const double correction = blocks * k * (k + 1.0) * (k + 1.0) / 4.0;
  double sum_rj2 = 0.0;
  for (double r : rank_sums) sum_rj2 += r * r;
  const double denom = sum_sq - correction;

  TestOutcome& out = result.outcome;
  out.test = "friedman";
  out.n = blocks;
  out.sidedness = Sidedness::UpperTail;
  const double df = k - 1;
  out.statistics["df"] = df;
  if (denom <= 1e-9) {
    out.statistics["S"] = 0.0;
    out.p_value = 1.0;
    out.degenerate = true;
    return result;
  }
  const double s = df * (sum_rj2 - blocks * correction) / denom;
  out.statistics["S"] = s;
  const boost::math::chi_squared dist(df);
  out.p_value = std::clamp(boost::math::cdf(boost::math::complement(dist, std::max(s, 0.0))), 0.0, 1.0);
  return result;
}

TestOutcome wilcoxon_signed_rank(std::span<const double> values) {
  if (values.empty()) throw InstanceError("wilcoxon: no values");
  TestOutcome out;
  out.test = "wilcoxon_signed_rank";
  out.sidedness = Sidedness::TwoSided;
  std::vector<double> nonzero;
  for (double v : values) {
    if (std::abs(v) > kTolerance) nonzero.push_back(v);
  }
  const int n = static_cast<int>(nonzero.size());
  out.n = n;
  if (n == 0) {
    out.statistics = {{"T+", 0.0}, {"T-", 0.0}};
    out.z = 0.0;
    out.p_value = 1.0;
    out.degenerate = true;
    return out;
  }
  std::vector<double> magnitudes(n);
  std::transform(nonzero.begin(), nonzero.end(), magnitudes.begin(), [](double v) { return std::abs(v); });
  const auto ranks = mid_ranks(magnitudes);
  double t_plus = 0.0;
  double t_minus = 0.0;
  for (int t = 0; t < n; ++t) (nonzero[t] > 0 ? t_plus : t_minus) += ranks[t];
  const double nn = n;
  const double mean = nn * (nn + 1.0) / 4.0;
  const double sd = std::sqrt(nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0);
  const double z = (t_plus - mean) / sd;
  out.statistics = {{"T+", t_plus}, {"T-", t_minus}, {"Z", z}};
  out.z = z;
  const boost::math::normal standard;
  out.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(standard, std::abs(z))));
  return out;
}

TestOutcome sign_test(std::span<const double> values) {
  if (values.empty()) throw InstanceError("sign test: no values");
  TestOutcome out;
  out.test = "sign";
  out.exact = true;
  out.sidedness = Sidedness::TwoSided;
  int positive = 0;
  int n = 0;
  for (double v : values) {
    if (std::abs(v) <= kTolerance) continue;
    ++n;
    if (v > 0) ++positive;
  }
  out.n = n;
  out.statistics = {{"B", static_cast<double>(positive)}};
  if (n == 0) {
    out.p_value = 1.0;
    out.degenerate = true;
    return out;
  }
  const boost::math::binomial dist(n, 0.5);
  const double lower = boost::math::cdf(dist, positive);
  const double upper = positive == 0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, positive - 1));
  out.p_value = std::min(1.0, 2.0 * std::min(lower, upper));
  return out;
}

std::vector<std::string> ComparisonReport::ordering() const {
  std::vector<std::size_t> idx(algorithms.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](auto a, auto b) { return average_ranks[a] > average_ranks[b]; });
  std::vector<std::string> out;
  for (auto i : idx) out.push_back(algorithms[i]);
  return out;
}

ComparisonReport overall_comparison(std::span<const TrialSet> trial_sets, double alpha) {
  check_alpha(alpha);
  ComparisonReport report;
  report.alpha = alpha;
  for (const auto& ts : trial_sets) {
    if (ts.costs.empty()) {
      throw InstanceError("empty trial set for (" + ts.algorithm + ", " + ts.instance + ")");
    }
    if (std::find(report.algorithms.begin(), report.algorithms.end(), ts.algorithm) ==
        report.algorithms.end()) {
      report.algorithms.push_back(ts.algorithm);
    }
    if (std::find(report.instances.begin(), report.instances.end(), ts.instance) ==
        report.instances.end()) {
      report.instances.push_back(ts.instance);
    }
  }
  const int k = static_cast<int>(report.algorithms.size());
  const int p = static_cast<int>(report.instances.size());
  if (k == 0) throw InstanceError("no trial sets to compare");

  // grid[inst][alg] -> index into trial_sets
  std::vector<std::vector<int>> grid(p, std::vector<int>(k, -1));
  auto index_of = [](const std::vector<std::string>& v, const std::string& s) {
    return static_cast<int>(std::find(v.begin(), v.end(), s) - v.begin());
  };
  for (std::size_t t = 0; t < trial_sets.size(); ++t) {
    const int a = index_of(report.algorithms, trial_sets[t].algorithm);
    const int q = index_of(report.instances, trial_sets[t].instance);
    if (grid[q][a] >= 0) {
      throw InstanceError("duplicate trial set for (" + trial_sets[t].algorithm + ", " +
                          trial_sets[t].instance + ")");
    }
    grid[q][a] = static_cast<int>(t);
  }
  std::vector<std::string> missing;
  for (int q = 0; q < p; ++q) {
    for (int a = 0; a < k; ++a) {
      if (grid[q][a] < 0) missing.push_back("(" + report.algorithms[a] + ", " + report.instances[q] + ")");
    }
  }
  if (!missing.empty()) {
    std::string msg = "incomplete results grid; missing cells:";
    for (const auto& m : missing) msg += " " + m;
    throw InstanceError(msg);
  }

  report.ranks = Matrix<double>(p, k);
  for (int q = 0; q < p; ++q) {
    std::vector<TrialSet> row;
    row.reserve(k);
    for (int a = 0; a < k; ++a) row.push_back(trial_sets[grid[q][a]]);
    EMatrix e = build_e_matrix(row, alpha);
    const auto ranks = mid_ranks(copeland_scores(e));
    for (int a = 0; a < k; ++a) report.ranks(q, a) = ranks[a];
    for (const auto& triple : intransitive_triples(e)) report.cycles.emplace_back(q, triple);
    report.e_matrices.push_back(std::move(e));
  }

  report.average_ranks.assign(k, 0.0);
  for (int a = 0; a < k; ++a) {
    for (int q = 0; q < p; ++q) report.average_ranks[a] += report.ranks(q, a);
    report.average_ranks[a] /= p;
  }
  if (k >= 2 && p >= 2) report.friedman = friedman(report.ranks);

  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      PairwiseComparison pc;
      pc.first = report.algorithms[a];
      pc.second = report.algorithms[b];
      for (int q = 0; q < p; ++q) pc.e_values.push_back(report.e_matrices[q].values(a, b));
      pc.wilcoxon = wilcoxon_signed_rank(pc.e_values);
      pc.sign = sign_test(pc.e_values);
      report.pairwise.push_back(std::move(pc));
    }
  }
  return report;
}

std::vector<ComparisonReport> overall_comparison(std::span<const TrialSet> trial_sets,
                                                 std::span<const double> alphas) {
  std::vector<ComparisonReport> out;
  out.reserve(alphas.size());
  for (double alpha : alphas) out.push_back(overall_comparison(trial_sets, alpha));
  return out;
}

bool same_conclusions(const ComparisonReport& a, const ComparisonReport& b, double level) {
  if (a.algorithms != b.algorithms || a.instances != b.instances) return false;
  if (a.ranks != b.ranks) return false;
  if (a.pairwise.size() != b.pairwise.size()) return false;
  for (std::size_t t = 0; t < a.pairwise.size(); ++t) {
    const auto& x = a.pairwise[t];
    const auto& y = b.pairwise[t];
    if (x.wilcoxon.significant(level) != y.wilcoxon.significant(level)) return false;
    if (x.sign.significant(level) != y.sign.significant(level)) return false;
  }
  return true;
}

nlohmann::json to_json(const TestOutcome& o) {
  nlohmann::json j = {{"test", o.test},
                      {"statistics", o.statistics},
                      {"n", o.n},
                      {"exact", o.exact},
                      {"p_value", o.p_value},
                      {"sidedness", o.sidedness == Sidedness::TwoSided ? "two_sided" : "upper_tail"},
                      {"degenerate", o.degenerate}};
  j["z"] = o.z ? nlohmann::json(*o.z) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const ComparisonReport& r) {
  using nlohmann::json;
  json instances = json::array();
  for (std::size_t q = 0; q < r.instances.size(); ++q) {
    const auto& e = r.e_matrices[q];
    json rows = json::array();
    for (int i = 0; i < e.values.rows(); ++i) {
      rows.push_back(std::vector<double>(e.values.row(i).begin(), e.values.row(i).end()));
    }
    std::vector<double> ranks(r.ranks.row(static_cast<int>(q)).begin(), r.ranks.row(static_cast<int>(q)).end());
    instances.push_back({{"instance", r.instances[q]}, {"e_matrix", rows}, {"ranks", ranks}});
  }
  json pairwise = json::array();
  for (const auto& pc : r.pairwise) {
    pairwise.push_back({{"first", pc.first},
                        {"second", pc.second},
                        {"e_values", pc.e_values},
                        {"wilcoxon", to_json(pc.wilcoxon)},
                        {"sign", to_json(pc.sign)}});
  }
  json cycles = json::array();
  for (const auto& [q, t] : r.cycles) {
    cycles.push_back({{"instance", r.instances[q]},
                      {"cycle", {r.algorithms[t[0]], r.algorithms[t[1]], r.algorithms[t[2]]}}});
  }
  json j = {{"alpha", r.alpha},
            {"algorithms", r.algorithms},
            {"instances", instances},
            {"average_ranks", r.average_ranks},
            {"ordering_best_first", r.ordering()},
            {"pairwise", pairwise},
            {"cycles", cycles}};
  if (r.friedman) {
    j["friedman"] = to_json(r.friedman->outcome);
  } else {
    j["friedman"] = nullptr;
  }
  return j;
}

std::string to_text(const ComparisonReport& r) {
  std::ostringstream out;
  std::size_t width = 9;
  for (const auto& a : r.algorithms) width = std::max(width, a.size() + 2);
  std::size_t inst_width = 10;
  for (const auto& q : r.instances) inst_width = std::max(inst_width, q.size() + 2);

  out << "alpha = " << fixed(r.alpha, 2) << "\n\n";
  out << "Per-instance ranks (" << r.algorithms.size() << " = best, 1 = worst)\n";
  out << std::left << std::setw(static_cast<int>(inst_width)) << "instance" << std::right;
  for (const auto& a : r.algorithms) out << std::setw(static_cast<int>(width)) << a;
  out << "\n";
  for (std::size_t q = 0; q < r.instances.size(); ++q) {
    out << std::left << std::setw(static_cast<int>(inst_width)) << r.instances[q] << std::right;
    for (int a = 0; a < r.ranks.cols(); ++a) {
      const double v = r.ranks(static_cast<int>(q), a);
      out << std::setw(static_cast<int>(width)) << (v == std::floor(v) ? fixed(v, 0) : fixed(v, 1));
    }
    out << "\n";
  }
  out << std::left << std::setw(static_cast<int>(inst_width)) << "average" << std::right;
  for (double v : r.average_ranks) out << std::setw(static_cast<int>(width)) << fixed(v, 3);
  out << "\n\nOrdering (best first):";
  for (const auto& a : r.ordering()) out << " " << a;
  out << "\n";

  if (r.friedman) {
    const auto& f = r.friedman->outcome;
    out << "\nFriedman: S = " << fixed(f.statistics.at("S"), 3) << ", df = "
        << fixed(f.statistics.at("df"), 0) << ", p = " << std::setprecision(4) << f.p_value
        << (f.degenerate ? " (degenerate)" : "") << "\n";
  }

  if (!r.pairwise.empty()) {
    out << "\nPairwise tests on E(first, second) across instances\n";
    out << std::left << std::setw(static_cast<int>(width)) << "first" << std::setw(static_cast<int>(width))
        << "second" << std::right << std::setw(10) << "T+" << std::setw(10) << "T-" << std::setw(9)
        << "Z" << std::setw(11) << "p(W)" << std::setw(6) << "B" << std::setw(5) << "n" << std::setw(11)
        << "p(sign)" << "\n";
    for (const auto& pc : r.pairwise) {
      const auto& w = pc.wilcoxon;
      out << std::left << std::setw(static_cast<int>(width)) << pc.first << std::setw(static_cast<int>(width))
          << pc.second << std::right << std::setw(10) << fixed(w.statistics.at("T+"), 1) << std::setw(10)
          << fixed(w.statistics.at("T-"), 1) << std::setw(9) << signed_fixed(w.z.value_or(0.0), 3)
          << std::setw(11) << std::setprecision(4) << w.p_value << std::setw(6)
          << fixed(pc.sign.statistics.at("B"), 0) << std::setw(5) << pc.sign.n << std::setw(11)
          << std::setprecision(4) << pc.sign.p_value << (w.significant() || pc.sign.significant() ? "  *" : "")
          << "\n";
    }
    out << "(* significant at the 5% level by at least one test)\n";
  }

  if (!r.cycles.empty()) {
    out << "\nIntransitive E relations:\n";
    for (const auto& [q, t] : r.cycles) {
      out << "  " << r.instances[q] << ": " << r.algorithms[t[0]] << " > " << r.algorithms[t[1]] << " > "
          << r.algorithms[t[2]] << " > " << r.algorithms[t[0]] << "\n";
    }
  }
  return out.str();
}

}  // namespace roster
