#pragma once

// Fixtures and brute-force oracles shared by the unit and acceptance tests.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "roster/instances.hpp"
#include "roster/problem.hpp"
#include "roster/rng.hpp"

namespace roster::testing {

inline std::filesystem::path data_dir() { return ROSTER_DATA_DIR; }

/// Builds an instance from pattern strings; demand rows are slots.
inline ProblemInstance make_instance(int grades, std::vector<Nurse> nurses,
                                     const std::vector<std::string>& patterns,
                                     const std::vector<std::vector<std::int64_t>>& costs,
                                     const std::vector<std::vector<int>>& demand) {
  std::vector<ShiftPattern> cat;
  for (const auto& p : patterns) cat.push_back(ShiftPattern::parse(p));
  Matrix<std::int64_t> c(static_cast<int>(nurses.size()), static_cast<int>(cat.size()));
  for (std::size_t i = 0; i < costs.size(); ++i) {
    for (std::size_t j = 0; j < costs[i].size(); ++j) c(static_cast<int>(i), static_cast<int>(j)) = costs[i][j];
  }
  Matrix<int> d(kSlots, grades);
  for (std::size_t k = 0; k < demand.size(); ++k) {
    for (std::size_t s = 0; s < demand[k].size(); ++s) d(static_cast<int>(k), static_cast<int>(s)) = demand[k][s];
  }
  return ProblemInstance(grades, std::move(nurses), std::move(cat), std::move(c), std::move(d));
}

/// Same instance with every demand entry replaced.
inline ProblemInstance with_demand(const ProblemInstance& inst, const Matrix<int>& demand) {
  return ProblemInstance(inst.grade_count(), {inst.nurses().begin(), inst.nurses().end()},
                         {inst.patterns().begin(), inst.patterns().end()}, inst.pref_cost(), demand);
}

inline ProblemInstance with_zero_demand(const ProblemInstance& inst) {
  return with_demand(inst, Matrix<int>(kSlots, inst.grade_count(), 0));
}

/// Calls fn on every roster of the instance (product of the F(i)).
inline void for_each_roster(const ProblemInstance& inst, const std::function<void(const Roster&)>& fn) {
  const int n = inst.nurse_count();
  Roster r;
  r.assignment.assign(n, 0);
  std::vector<std::size_t> idx(n, 0);
  for (int i = 0; i < n; ++i) r.assignment[i] = inst.feasible(i)[0];
  for (;;) {
    fn(r);
    int i = n - 1;
    while (i >= 0) {
      if (++idx[i] < inst.feasible(i).size()) {
        r.assignment[i] = inst.feasible(i)[idx[i]];
        break;
      }
      idx[i] = 0;
      r.assignment[i] = inst.feasible(i)[0];
      --i;
    }
    if (i < 0) return;
  }
}

/// Optimal cost by exhaustive enumeration; nullopt when no roster is feasible.
inline std::optional<std::int64_t> brute_force_optimum(const ProblemInstance& inst) {
  std::optional<std::int64_t> best;
  for_each_roster(inst, [&](const Roster& r) {
    if (!is_feasible(inst, r)) return;
    const auto c = roster_cost(inst, r);
    if (!best || c < *best) best = c;
  });
  return best;
}

/// Small random instance mixing day, night and two-shift combined
/// contracts; demand is a fraction of a random roster's cover.
inline ProblemInstance random_small_instance(std::uint64_t seed, int nurses, int grades = 2,
                                             double tightness = 0.8) {
  GeneratorConfig cfg = GeneratorConfig::tiny(nurses, seed);
  cfg.grades = grades;
  cfg.tightness = tightness;
  cfg.contracts = {{ContractType::Days, 6, 0.4}, {ContractType::Nights, 6, 0.4}, {ContractType::Both, 2, 0.2}};
  return generate_instance(cfg);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  std::string f;
  while (std::getline(s, f, ',')) out.push_back(f);
  return out;
}

/// Reads a CSV with a header line into rows of fields.
inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(split_csv_line(line));
  }
  return rows;
}

/// The E column of a two-column (week, e) file.
inline std::vector<double> read_e_column(const std::filesystem::path& path) {
  std::vector<double> out;
  for (const auto& row : read_csv(path)) out.push_back(std::stod(row.at(1)));
  return out;
}

}  // namespace roster::testing
