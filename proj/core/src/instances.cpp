#include "roster/instances.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "json_util.hpp"
#include "roster/rng.hpp"

namespace roster {

namespace {

using nlohmann::json;
using detail::as_int;
using detail::reject_unknown;
using detail::require;

/// Calls fn(mask) for every `count`-subset of slots [first, first + width),
/// in lexicographic order of the chosen positions.
template <typename Fn>
void for_each_subset(int first, int width, int count, Fn&& fn) {
  if (count < 0 || count > width) return;
  std::vector<int> pos(count);
  std::iota(pos.begin(), pos.end(), 0);
  while (true) {
    std::uint16_t mask = 0;
    for (int p : pos) mask |= static_cast<std::uint16_t>(1U << (first + p));
    fn(mask);
    int i = count - 1;
    while (i >= 0 && pos[i] == width - count + i) --i;
    if (i < 0) return;
    ++pos[i];
    for (int t = i + 1; t < count; ++t) pos[t] = pos[t - 1] + 1;
  }
}

bool passes(CombinedRule rule, const ShiftPattern& p) {
  if (rule == CombinedRule::Any) return true;
  int last_day = -1;
  int first_night = kDays;
  for (int k = 0; k < kDays; ++k) {
    if (p.covers(k)) last_day = k;
  }
  for (int k = kDays - 1; k >= 0; --k) {
    if (p.covers(kDays + k)) first_night = k;
  }
  return last_day < first_night;
}

void check_count(int count, int max, const char* what) {
  if (count < 0 || count > max) {
    throw InstanceError(std::string(what) + " count " + std::to_string(count) + " outside 0.." +
                        std::to_string(max));
  }
}

std::string_view to_string(CombinedRule rule) {
  return rule == CombinedRule::Any ? "any" : "days_then_nights";
}

CombinedRule parse_rule(std::string_view s) {
  if (s == "any") return CombinedRule::Any;
  if (s == "days_then_nights") return CombinedRule::DaysThenNights;
  throw ParseError("unknown combined_rule \"" + std::string(s) + "\"");
}

}  // namespace

std::vector<ShiftPattern> enumerate_patterns(const std::set<int>& day_counts,
                                             const std::set<int>& night_counts,
                                             const std::set<int>& combined_counts,
                                             CombinedRule rule) {
  std::vector<ShiftPattern> out;
  std::unordered_set<std::uint16_t> seen;
  auto add = [&](std::uint16_t mask) {
    if (seen.insert(mask).second) out.push_back(ShiftPattern::from_bits(mask));
  };
  for (int c : day_counts) {
    check_count(c, kDays, "day");
    for_each_subset(0, kDays, c, add);
  }
  for (int c : night_counts) {
    check_count(c, kDays, "night");
    for_each_subset(kDays, kDays, c, add);
  }
  for (int c : combined_counts) {
    check_count(c, kSlots, "combined");
    for_each_subset(0, kSlots, c, [&](std::uint16_t mask) {
      const auto p = ShiftPattern::from_bits(mask);
      if (p.is_combined() && passes(rule, p)) add(mask);
    });
  }
  return out;
}

void GeneratorConfig::validate() const {
  if (nurses < 1) throw InstanceError("generator: nurses must be >= 1");
  if (grades < 1) throw InstanceError("generator: grades must be >= 1");
  if (!(tightness > 0.0 && tightness <= 1.0)) {
    throw InstanceError("generator: tightness must lie in (0, 1]");
  }
  if (max_cost < 0) throw InstanceError("generator: max_cost must be >= 0");
  if (contracts.empty()) throw InstanceError("generator: contract mix is empty");
  double total = 0.0;
  for (const auto& c : contracts) {
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) {
      throw InstanceError("generator: contract weights must be finite and nonnegative");
    }
    const int max = c.type == ContractType::Both ? kSlots : kDays;
    if (c.shifts < 0 || c.shifts > max) {
      throw InstanceError("generator: " + std::string(roster::to_string(c.type)) +
                          " contract shift count " + std::to_string(c.shifts) + " out of range");
    }
    if (c.type == ContractType::Both && (c.shifts < 2 || c.shifts > 2 * kDays)) {
      throw InstanceError("generator: combined contracts need 2..14 shifts");
    }
    total += c.weight;
  }
  if (total <= 0.0) throw InstanceError("generator: contract weights sum to zero");
}

GeneratorConfig GeneratorConfig::desk() {
  GeneratorConfig cfg;
  cfg.nurses = 10;
  cfg.grades = 3;
  cfg.contracts = {{ContractType::Days, 5, 0.5},
                   {ContractType::Nights, 4, 0.4},
                   {ContractType::Both, 7, 0.1}};
  cfg.combined_rule = CombinedRule::DaysThenNights;
  return cfg;
}

GeneratorConfig GeneratorConfig::ward() {
  GeneratorConfig cfg;
  cfg.nurses = 30;
  cfg.grades = 3;
  cfg.contracts = {{ContractType::Days, 3, 0.1},   {ContractType::Days, 4, 0.15},
                   {ContractType::Days, 5, 0.3},   {ContractType::Nights, 3, 0.1},
                   {ContractType::Nights, 4, 0.15}, {ContractType::Nights, 5, 0.05},
                   {ContractType::Both, 4, 0.05},  {ContractType::Both, 5, 0.05},
                   {ContractType::Both, 6, 0.05}};
  cfg.combined_rule = CombinedRule::DaysThenNights;
  cfg.max_cost = 50;
  return cfg;
}

GeneratorConfig GeneratorConfig::tiny(int nurses, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.nurses = nurses;
  cfg.grades = 2;
  cfg.contracts = {{ContractType::Days, 6, 0.5}, {ContractType::Nights, 6, 0.5}};
  cfg.combined_rule = CombinedRule::DaysThenNights;
  cfg.max_cost = 10;
  cfg.seed = seed;
  return cfg;
}

std::vector<int> allocate_contracts(const GeneratorConfig& cfg) {
  cfg.validate();
  const double total = std::accumulate(cfg.contracts.begin(), cfg.contracts.end(), 0.0,
                                       [](double a, const ContractShare& c) { return a + c.weight; });
  std::vector<int> counts(cfg.contracts.size());
  std::vector<double> remainder(cfg.contracts.size());
  int assigned = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double exact = cfg.nurses * cfg.contracts[i].weight / total;
    counts[i] = static_cast<int>(std::floor(exact));
    remainder[i] = exact - counts[i];
    assigned += counts[i];
  }
  std::vector<std::size_t> idx(counts.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t t = 0; assigned < cfg.nurses; ++t, ++assigned) ++counts[idx[t % idx.size()]];
  return counts;
}

std::vector<ShiftPattern> catalog_for(const GeneratorConfig& cfg) {
  std::set<int> days, nights, combined;
  for (const auto& c : cfg.contracts) {
    switch (c.type) {
      case ContractType::Days: days.insert(c.shifts); break;
      case ContractType::Nights: nights.insert(c.shifts); break;
      case ContractType::Both: combined.insert(c.shifts); break;
    }
  }
  return enumerate_patterns(days, nights, combined, cfg.combined_rule);
}

Roster seeding_roster(const GeneratorConfig& cfg, const ProblemInstance& inst) {
  Rng rng(derive_seed(cfg.seed, "roster"));
  Roster r;
  r.assignment.reserve(inst.nurse_count());
  for (int i = 0; i < inst.nurse_count(); ++i) r.assignment.push_back(rng.pick(inst.feasible(i)));
  return r;
}

ProblemInstance generate_instance(const GeneratorConfig& cfg) {
  cfg.validate();
  const auto counts = allocate_contracts(cfg);

  Rng grade_rng(derive_seed(cfg.seed, "grades"));
  std::vector<Nurse> nurses;
  nurses.reserve(cfg.nurses);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (int t = 0; t < counts[c]; ++t) {
      Nurse nurse;
      nurse.grade = static_cast<int>(grade_rng.between(1, cfg.grades));
      nurse.contract = {cfg.contracts[c].type, cfg.contracts[c].shifts};
      nurses.push_back(nurse);
    }
  }

  auto patterns = catalog_for(cfg);
  const int n = cfg.nurses;
  const int m = static_cast<int>(patterns.size());

  Rng cost_rng(derive_seed(cfg.seed, "costs"));
  Matrix<std::int64_t> costs(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) costs(i, j) = cost_rng.between(0, cfg.max_cost);
  }

  // Zero demand first so the seeding roster can be drawn from validated F(i).
  ProblemInstance open(cfg.grades, nurses, patterns, costs, Matrix<int>(kSlots, cfg.grades));
  const Roster seed = seeding_roster(cfg, open);
  const Matrix<int> cover = coverage(open, seed);
  Matrix<int> demand(kSlots, cfg.grades);
  for (int k = 0; k < kSlots; ++k) {
    for (int s = 0; s < cfg.grades; ++s) {
      demand(k, s) = static_cast<int>(std::floor(cfg.tightness * cover(k, s)));
    }
  }
  return ProblemInstance(cfg.grades, std::move(nurses), std::move(patterns), std::move(costs),
                         std::move(demand));
}

nlohmann::json to_json(const GeneratorConfig& cfg) {
  json contracts = json::array();
  for (const auto& c : cfg.contracts) {
    contracts.push_back(
        {{"type", std::string(to_string(c.type))}, {"shifts", c.shifts}, {"weight", c.weight}});
  }
  return {{"nurses", cfg.nurses},
          {"grades", cfg.grades},
          {"contracts", contracts},
          {"combined_rule", std::string(to_string(cfg.combined_rule))},
          {"tightness", cfg.tightness},
          {"max_cost", cfg.max_cost},
          {"seed", cfg.seed}};
}

GeneratorConfig generator_preset(std::string_view name, int nurses) {
  if (name == "desk") return GeneratorConfig::desk();
  if (name == "ward") return GeneratorConfig::ward();
  if (name == "tiny") return GeneratorConfig::tiny(nurses, 1);
  throw InstanceError("unknown generator preset \"" + std::string(name) + "\" (desk, ward, tiny)");
}

GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
  const std::string ctx = "generator config";
  reject_unknown(j,
                 {"preset", "nurses", "grades", "contracts", "combined_rule", "tightness", "max_cost", "seed"},
                 ctx);
  GeneratorConfig cfg;
  try {
    if (j.contains("preset")) {
      const int n = j.contains("nurses") ? static_cast<int>(as_int(j["nurses"], ctx + ".nurses")) : 5;
      cfg = generator_preset(j["preset"].get<std::string>(), n);
    }
    if (j.contains("nurses")) cfg.nurses = static_cast<int>(as_int(j["nurses"], ctx + ".nurses"));
    if (j.contains("grades")) cfg.grades = static_cast<int>(as_int(j["grades"], ctx + ".grades"));
    if (j.contains("combined_rule")) cfg.combined_rule = parse_rule(j["combined_rule"].get<std::string>());
    if (j.contains("tightness")) cfg.tightness = j["tightness"].get<double>();
    if (j.contains("max_cost")) cfg.max_cost = as_int(j["max_cost"], ctx + ".max_cost");
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("contracts")) {
      cfg.contracts.clear();
      for (const auto& c : j["contracts"]) {
        reject_unknown(c, {"type", "shifts", "weight"}, ctx + ".contracts");
        ContractShare share;
        share.type = parse_contract_type(require(c, "type", ctx).get<std::string>());
        share.shifts = static_cast<int>(as_int(require(c, "shifts", ctx), ctx + ".shifts"));
        if (c.contains("weight")) share.weight = c["weight"].get<double>();
        cfg.contracts.push_back(share);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(ctx + ": " + e.what());
  } catch (const InstanceError& e) {
    throw ParseError(ctx + ": " + e.what());
  }
  return cfg;
}

std::string instance_to_string(const ProblemInstance& inst) {
  std::ostringstream out;
  auto row_text = [](auto values) {
    std::string s = "[";
    for (std::size_t t = 0; t < values.size(); ++t) {
      if (t) s += ", ";
      s += std::to_string(values[t]);
    }
    return s + "]";
  };
  out << "{\n";
  out << "  \"version\": " << kInstanceFormatVersion << ",\n";
  out << "  \"grades\": " << inst.grade_count() << ",\n";
  out << "  \"nurses\": [\n";
  for (int i = 0; i < inst.nurse_count(); ++i) {
    const Nurse& nurse = inst.nurse(i);
    out << "    {\"grade\": " << nurse.grade << ", \"contract\": {\"type\": \""
        << to_string(nurse.contract.type) << "\", \"shifts\": " << nurse.contract.shifts << "}}"
        << (i + 1 < inst.nurse_count() ? ",\n" : "\n");
  }
  out << "  ],\n";
  out << "  \"patterns\": [\n";
  for (int j = 0; j < inst.pattern_count(); ++j) {
    out << "    \"" << inst.pattern(j).to_string() << "\""
        << (j + 1 < inst.pattern_count() ? ",\n" : "\n");
  }
  out << "  ],\n";
  out << "  \"pref_cost\": [\n";
  for (int i = 0; i < inst.nurse_count(); ++i) {
    out << "    " << row_text(inst.pref_cost().row(i)) << (i + 1 < inst.nurse_count() ? ",\n" : "\n");
  }
  out << "  ],\n";
  out << "  \"demand\": [\n";
  for (int k = 0; k < kSlots; ++k) {
    out << "    " << row_text(inst.demand().row(k)) << (k + 1 < kSlots ? ",\n" : "\n");
  }
  out << "  ]\n}\n";
  return out.str();
}

ProblemInstance instance_from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("instance: malformed JSON: ") + e.what());
  }
  const std::string ctx = "instance";
  reject_unknown(j, {"version", "grades", "nurses", "patterns", "pref_cost", "demand"}, ctx);
  const auto version = as_int(require(j, "version", ctx), ctx + ".version");
  if (version != kInstanceFormatVersion) {
    throw ParseError(ctx + ": unsupported version " + std::to_string(version));
  }
  const int grades = static_cast<int>(as_int(require(j, "grades", ctx), ctx + ".grades"));
  if (grades < 1) throw ParseError(ctx + ": grades must be >= 1");

  const json& jn = require(j, "nurses", ctx);
  if (!jn.is_array()) throw ParseError(ctx + ".nurses: expected an array");
  std::vector<Nurse> nurses;
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const std::string nctx = ctx + ".nurses[" + std::to_string(i) + "]";
    reject_unknown(jn[i], {"grade", "contract"}, nctx);
    Nurse nurse;
    nurse.grade = static_cast<int>(as_int(require(jn[i], "grade", nctx), nctx + ".grade"));
    const json& jc = require(jn[i], "contract", nctx);
    reject_unknown(jc, {"type", "shifts"}, nctx + ".contract");
    const json& type = require(jc, "type", nctx + ".contract");
    if (!type.is_string()) throw ParseError(nctx + ".contract.type: expected a string");
    try {
      nurse.contract.type = parse_contract_type(type.get<std::string>());
    } catch (const InstanceError& e) {
      throw ParseError(nctx + ".contract: " + e.what());
    }
    nurse.contract.shifts =
        static_cast<int>(as_int(require(jc, "shifts", nctx + ".contract"), nctx + ".contract.shifts"));
    nurses.push_back(nurse);
  }

  const json& jp = require(j, "patterns", ctx);
  if (!jp.is_array()) throw ParseError(ctx + ".patterns: expected an array");
  std::vector<ShiftPattern> patterns;
  for (std::size_t t = 0; t < jp.size(); ++t) {
    if (!jp[t].is_string()) throw ParseError(ctx + ".patterns[" + std::to_string(t) + "]: expected a string");
    try {
      patterns.push_back(ShiftPattern::parse(jp[t].get<std::string>()));
    } catch (const InstanceError& e) {
      throw ParseError(ctx + ".patterns[" + std::to_string(t) + "]: " + e.what());
    }
  }

  auto read_matrix = [&](const char* key, int rows, int cols, auto tag) {
    using T = decltype(tag);
    const std::string mctx = ctx + "." + key;
    const json& jm = require(j, key, ctx);
    if (!jm.is_array() || static_cast<int>(jm.size()) != rows) {
      throw ParseError(mctx + ": expected " + std::to_string(rows) + " rows, got " +
                       std::to_string(jm.is_array() ? jm.size() : 0));
    }
    Matrix<T> out(rows, cols);
    for (int r = 0; r < rows; ++r) {
      if (!jm[r].is_array() || static_cast<int>(jm[r].size()) != cols) {
        throw ParseError(mctx + "[" + std::to_string(r) + "]: expected " + std::to_string(cols) +
                         " columns");
      }
      for (int c = 0; c < cols; ++c) out(r, c) = static_cast<T>(as_int(jm[r][c], mctx));
    }
    return out;
  };
  auto costs = read_matrix("pref_cost", static_cast<int>(nurses.size()),
                           static_cast<int>(patterns.size()), std::int64_t{});
  auto demand = read_matrix("demand", kSlots, grades, int{});
  try {
    return ProblemInstance(grades, std::move(nurses), std::move(patterns), std::move(costs),
                           std::move(demand));
  } catch (const InstanceError& e) {
    throw ParseError(ctx + ": " + e.what());
  }
}

void write_instance(const ProblemInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << instance_to_string(inst);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ProblemInstance read_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open instance file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return instance_from_string(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace roster
