#include "roster/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json_util.hpp"
#include "roster/ga_direct.hpp"
#include "roster/rng.hpp"

namespace roster {

namespace fs = std::filesystem;
using nlohmann::json;
using detail::as_int;
using detail::reject_unknown;
using detail::require;

namespace {

// Names end up in CSV cells and file names.
void check_name(const std::string& name, const char* what) {
  if (name.empty()) throw InstanceError(std::string(what) + " name must not be empty");
  for (unsigned char c : name) {
    if (!(std::isalnum(c) || c == '_' || c == '-' || c == '.' || c == '+')) {
      throw InstanceError(std::string(what) + " name \"" + name +
                          "\" may only use letters, digits and _ - . +");
    }
  }
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw std::runtime_error("error writing " + path.string());
}

// ---------------------------------------------------------------- presets

AlgorithmPreset indirect(std::string name, DecoderBound bound, CrossoverConfig crossover,
                         double elitism, std::string description) {
  AlgorithmPreset p;
  p.name = std::move(name);
  p.encoding = Encoding::Indirect;
  p.ga.crossover = crossover;
  p.ga.elitism = elitism;
  p.decoder.mode = DecoderMode::Combined;
  p.decoder.bound = bound;
  p.description = std::move(description);
  p.specified = {"encoding", "decoder.bound", "ga.crossover.kind", "ga.elitism"};
  if (crossover.kind == CrossoverKind::Uniform) p.specified.push_back("ga.crossover.bias");
  p.decided = {"ga.population", "ga.generations", "ga.mutation_rate", "ga.w_demand",
               "decoder.mode", "decoder.w_cover", "decoder.w_cost"};
  return p;
}

AlgorithmPreset direct(std::string name, std::string description) {
  AlgorithmPreset p;
  p.name = std::move(name);
  p.encoding = Encoding::Direct;
  p.ga.crossover = {CrossoverKind::Uniform, 0.8};
  p.ga.elitism = 0.1;
  p.description = std::move(description);
  p.specified = {"encoding", "ga.crossover.kind", "ga.crossover.bias", "ga.elitism"};
  p.decided = {"ga.population", "ga.generations", "ga.mutation_rate", "ga.w_demand"};
  return p;
}

std::vector<AlgorithmPreset> make_presets() {
  using K = CrossoverKind;
  using B = DecoderBound;
  const CrossoverConfig u80{K::Uniform, 0.8};
  const CrossoverConfig automatic{K::Automatic, 0.8};
  std::vector<AlgorithmPreset> out;

  out.push_back(indirect("V1", B::LookAhead, u80, 0.1, "indirect, look-ahead bound, 80% uniform"));
  out.push_back(indirect("V2", B::None, u80, 0.1, "indirect, no bound, 80% uniform"));
  out.push_back(indirect("V3", B::Greedy, u80, 0.1, "indirect, greedy bound, 80% uniform"));
  out.push_back(indirect("V4", B::LookAhead, automatic, 0.1, "indirect, look-ahead bound, automatic crossover"));
  out.push_back(indirect("V5", B::LookAhead, {K::OnePoint, 0.8}, 0.1, "indirect, look-ahead bound, 1-point"));
  out.push_back(direct("V6", "direct, 80% uniform"));
  {
    auto p = direct("V7", "direct, 80% uniform, sub-populations (4-island ring)");
    p.ga.islands = {4, 10, 1};
    p.specified.push_back("ga.islands");
    p.decided.insert(p.decided.end(), {"ga.islands.count", "ga.islands.migration_interval",
                                       "ga.islands.migrants"});
    out.push_back(std::move(p));
  }
  {
    auto p = direct("V8", "direct, 80% uniform, hillclimber on the elite");
    p.ga.hillclimber = true;
    p.specified.push_back("ga.hillclimber");
    out.push_back(std::move(p));
  }

  out.push_back(indirect("U1", B::LookAhead, {K::Uniform, 0.5}, 0.1, "look-ahead bound, 50% uniform"));
  out.push_back(indirect("U2", B::LookAhead, {K::Uniform, 0.67}, 0.1, "look-ahead bound, 67% uniform"));
  out.push_back(indirect("U3", B::LookAhead, {K::Uniform, 0.75}, 0.1, "look-ahead bound, 75% uniform"));
  out.push_back(indirect("U4", B::LookAhead, u80, 0.1, "look-ahead bound, 80% uniform"));
  {
    auto p = indirect("U5", B::LookAhead, automatic, 0.1, "look-ahead bound, automatic crossover, auto-weights");
    p.ga.auto_weights = true;
    p.specified.push_back("ga.auto_weights");
    out.push_back(std::move(p));
  }
  out.push_back(indirect("U6", B::LookAhead, automatic, 0.1, "look-ahead bound, automatic crossover"));
  {
    auto p = indirect("U7", B::LookAhead, u80, 0.1, "look-ahead bound, 80% uniform, auto-weights");
    p.ga.auto_weights = true;
    p.specified.push_back("ga.auto_weights");
    out.push_back(std::move(p));
  }
  out.push_back(indirect("U8", B::LookAhead, automatic, 0.1, "same settings as V4"));

  const double elitism[] = {0.5, 0.4, 0.3, 0.2, 0.05};
  for (int t = 0; t < 5; ++t) {
    out.push_back(indirect("W" + std::to_string(t + 1), B::LookAhead, u80, elitism[t],
                           "look-ahead bound, 80% uniform, " + fixed(100 * elitism[t], 0) + "% elitism"));
  }
  {
    auto p = indirect("W6", B::LookAhead, {K::RankBiased, 0.8}, 0.1,
                      "look-ahead bound, rank-based crossover bias");
    p.decided.push_back("ga.crossover.kind:rank_biased");
    out.push_back(std::move(p));
  }
  {
    auto p = indirect("W7", B::LookAhead, {K::FitnessBiased, 0.8}, 0.1,
                      "look-ahead bound, fitness-ratio crossover bias");
    p.decided.push_back("ga.crossover.kind:fitness_biased");
    out.push_back(std::move(p));
  }
  out.push_back(indirect("W8", B::LookAhead, automatic, 0.1, "same settings as V4"));
  return out;
}

json to_json(const GaConfig& g) {
  return {{"population", g.population},
          {"generations", g.generations},
          {"crossover", {{"kind", to_string(g.crossover.kind)}, {"bias", g.crossover.bias}}},
          {"mutation_rate", g.mutation_rate},
          {"elitism", g.elitism},
          {"islands",
           {{"count", g.islands.count},
            {"migration_interval", g.islands.migration_interval},
            {"migrants", g.islands.migrants}}},
          {"hillclimber", g.hillclimber},
          {"auto_weights", g.auto_weights},
          {"w_demand", g.w_demand}};
}

json to_json(const DecoderConfig& d) {
  return {{"mode", to_string(d.mode)},
          {"w_cover", d.w_cover ? json(*d.w_cover) : json(nullptr)},
          {"w_cost", d.w_cost},
          {"bound", to_string(d.bound)}};
}

// Applies the fields present in `j`; returns the dotted paths touched.
std::vector<std::string> apply_ga(GaConfig& g, const json& j, const std::string& ctx) {
  reject_unknown(j, {"population", "generations", "crossover", "mutation_rate", "elitism", "islands",
                     "hillclimber", "auto_weights", "w_demand"},
                 ctx);
  std::vector<std::string> touched;
  auto mark = [&](const std::string& key) { touched.push_back("ga." + key); };
  if (j.contains("population")) g.population = static_cast<int>(as_int(j["population"], ctx)), mark("population");
  if (j.contains("generations")) g.generations = static_cast<int>(as_int(j["generations"], ctx)), mark("generations");
  if (j.contains("crossover")) {
    const auto& c = j["crossover"];
    reject_unknown(c, {"kind", "bias"}, ctx + ".crossover");
    if (c.contains("kind")) g.crossover.kind = parse_crossover_kind(c["kind"].get<std::string>()), mark("crossover.kind");
    if (c.contains("bias")) g.crossover.bias = c["bias"].get<double>(), mark("crossover.bias");
  }
  if (j.contains("mutation_rate")) g.mutation_rate = j["mutation_rate"].get<double>(), mark("mutation_rate");
  if (j.contains("elitism")) g.elitism = j["elitism"].get<double>(), mark("elitism");
  if (j.contains("islands")) {
    const auto& i = j["islands"];
    reject_unknown(i, {"count", "migration_interval", "migrants"}, ctx + ".islands");
    if (i.contains("count")) g.islands.count = static_cast<int>(as_int(i["count"], ctx)), mark("islands.count");
    if (i.contains("migration_interval")) {
      g.islands.migration_interval = static_cast<int>(as_int(i["migration_interval"], ctx));
      mark("islands.migration_interval");
    }
    if (i.contains("migrants")) g.islands.migrants = static_cast<int>(as_int(i["migrants"], ctx)), mark("islands.migrants");
  }
  if (j.contains("hillclimber")) g.hillclimber = j["hillclimber"].get<bool>(), mark("hillclimber");
  if (j.contains("auto_weights")) g.auto_weights = j["auto_weights"].get<bool>(), mark("auto_weights");
  if (j.contains("w_demand")) g.w_demand = j["w_demand"].get<double>(), mark("w_demand");
  return touched;
}

std::vector<std::string> apply_decoder(DecoderConfig& d, const json& j, const std::string& ctx) {
  reject_unknown(j, {"mode", "w_cover", "w_cost", "bound"}, ctx);
  std::vector<std::string> touched;
  if (j.contains("mode")) d.mode = parse_decoder_mode(j["mode"].get<std::string>()), touched.push_back("decoder.mode");
  if (j.contains("w_cover")) {
    d.w_cover = j["w_cover"].is_null() ? std::nullopt : std::optional<double>(j["w_cover"].get<double>());
    touched.push_back("decoder.w_cover");
  }
  if (j.contains("w_cost")) d.w_cost = j["w_cost"].get<double>(), touched.push_back("decoder.w_cost");
  if (j.contains("bound")) d.bound = parse_decoder_bound(j["bound"].get<std::string>()), touched.push_back("decoder.bound");
  return touched;
}

std::vector<InstanceSource> instance_sources_from_json(const json& j, const fs::path& base_dir) {
  std::vector<InstanceSource> out;
  const std::string ctx = "experiment config.instances";
  if (!j.is_array()) throw ParseError(ctx + ": expected an array");
  for (const auto& entry : j) {
    if (entry.is_string()) {
      InstanceSource s;
      fs::path p = entry.get<std::string>();
      s.file = p.is_relative() ? base_dir / p : p;
      s.id = p.stem().string();
      out.push_back(std::move(s));
      continue;
    }
    reject_unknown(entry, {"id", "file", "generator", "count"}, ctx);
    const bool has_file = entry.contains("file");
    const bool has_gen = entry.contains("generator");
    if (has_file == has_gen) throw ParseError(ctx + ": each entry needs exactly one of \"file\" or \"generator\"");
    if (has_file) {
      if (entry.contains("count")) throw ParseError(ctx + ": \"count\" applies to generator entries only");
      InstanceSource s;
      fs::path p = entry["file"].get<std::string>();
      s.file = p.is_relative() ? base_dir / p : p;
      s.id = entry.contains("id") ? entry["id"].get<std::string>() : p.stem().string();
      out.push_back(std::move(s));
      continue;
    }
    const GeneratorConfig gen = generator_config_from_json(entry["generator"]);
    const std::string id = require(entry, "id", ctx).get<std::string>();
    if (!entry.contains("count")) {
      out.push_back({id, std::nullopt, gen});
      continue;
    }
    // "count": n expands to ids <id>-01.. with seeds seed, seed+1, ...
    const auto count = as_int(entry["count"], ctx + ".count");
    if (count < 1) throw ParseError(ctx + ": count must be >= 1");
    const int width = std::max<int>(2, static_cast<int>(std::to_string(count).size()));
    for (std::int64_t t = 0; t < count; ++t) {
      GeneratorConfig g = gen;
      g.seed = gen.seed + static_cast<std::uint64_t>(t);
      std::ostringstream name;
      name << id << '-' << std::setw(width) << std::setfill('0') << (t + 1);
      out.push_back({name.str(), std::nullopt, g});
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- presets API

std::string_view to_string(Encoding encoding) {
  return encoding == Encoding::Direct ? "direct" : "indirect";
}

Encoding parse_encoding(std::string_view text) {
  if (text == "direct") return Encoding::Direct;
  if (text == "indirect") return Encoding::Indirect;
  throw InstanceError("unknown encoding \"" + std::string(text) + "\"");
}

void AlgorithmPreset::validate() const {
  check_name(name, "algorithm");
  try {
    ga.validate();
    if (encoding == Encoding::Direct) {
      if (ga.crossover.kind == CrossoverKind::Order || ga.crossover.kind == CrossoverKind::Automatic) {
        throw InstanceError("direct GA does not support crossover \"" +
                            std::string(to_string(ga.crossover.kind)) + "\"");
      }
      if (ga.auto_weights) throw InstanceError("direct GA has no decoder weights to adapt");
    } else {
      if (ga.hillclimber) throw InstanceError("indirect GA has no hillclimber");
      if (decoder.w_cost < 0 || (decoder.w_cover && *decoder.w_cover < 0)) {
        throw InstanceError("decoder weights must be nonnegative");
      }
      if (decoder.mode == DecoderMode::Combined &&
          (decoder.w_cost <= 0 || (decoder.w_cover && *decoder.w_cover <= 0))) {
        throw InstanceError("combined decoder needs positive w_cover and w_cost");
      }
    }
  } catch (const InstanceError& e) {
    throw InstanceError("preset \"" + name + "\": " + e.what());
  }
}

const std::vector<AlgorithmPreset>& builtin_presets() {
  static const std::vector<AlgorithmPreset> presets = make_presets();
  return presets;
}

const AlgorithmPreset& builtin_preset(std::string_view name) {
  for (const auto& p : builtin_presets()) {
    if (p.name == name) return p;
  }
  throw InstanceError("unknown preset \"" + std::string(name) + "\"");
}

json to_json(const AlgorithmPreset& p) {
  json j = {{"name", p.name},
            {"encoding", to_string(p.encoding)},
            {"description", p.description},
            {"ga", to_json(p.ga)},
            {"specified", p.specified},
            {"decided", p.decided}};
  j["decoder"] = p.encoding == Encoding::Indirect ? to_json(p.decoder) : json(nullptr);
  return j;
}

AlgorithmPreset preset_from_json(const json& j) {
  if (j.is_string()) return builtin_preset(j.get<std::string>());
  const std::string ctx = "preset";
  reject_unknown(j, {"name", "base", "encoding", "description", "ga", "decoder", "specified", "decided"}, ctx);
  AlgorithmPreset p;
  try {
    const bool derived = j.contains("base");
    if (derived) p = builtin_preset(j["base"].get<std::string>());
    p.name = require(j, "name", ctx).get<std::string>();
    std::vector<std::string> touched;
    if (j.contains("encoding")) p.encoding = parse_encoding(j["encoding"].get<std::string>()), touched.push_back("encoding");
    if (j.contains("description")) p.description = j["description"].get<std::string>();
    if (j.contains("ga")) {
      auto t = apply_ga(p.ga, j["ga"], ctx + " \"" + p.name + "\".ga");
      touched.insert(touched.end(), t.begin(), t.end());
    }
    if (j.contains("decoder") && !j["decoder"].is_null()) {
      auto t = apply_decoder(p.decoder, j["decoder"], ctx + " \"" + p.name + "\".decoder");
      touched.insert(touched.end(), t.begin(), t.end());
    }
    if (j.contains("specified")) p.specified = j["specified"].get<std::vector<std::string>>();
    if (j.contains("decided")) p.decided = j["decided"].get<std::vector<std::string>>();
    if (derived && !j.contains("specified") && !j.contains("decided")) {
      // An override is a decision, whatever the base said about the field.
      for (const auto& path : touched) {
        std::erase(p.specified, path);
        if (std::find(p.decided.begin(), p.decided.end(), path) == p.decided.end()) p.decided.push_back(path);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(ctx + ": " + e.what());
  }
  p.validate();
  return p;
}

TrialResult run_preset(const AlgorithmPreset& preset, const ProblemInstance& inst, std::uint64_t seed) {
  GaConfig cfg = preset.ga;
  cfg.seed = seed;
  if (preset.encoding == Encoding::Direct) return run_direct_ga(inst, cfg);
  return run_indirect_ga(inst, cfg, preset.decoder);
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::string_view algorithm, std::string_view instance,
                         int trial) {
  const std::uint64_t s = derive_seed(derive_seed(base_seed, algorithm), instance);
  return mix64(s ^ mix64(static_cast<std::uint64_t>(trial)));
}

// ---------------------------------------------------------------- config

ProblemInstance InstanceSource::load() const {
  try {
    if (file) return read_instance(*file);
    if (generator) return generate_instance(*generator);
  } catch (const std::exception& e) {
    throw InstanceError("instance \"" + id + "\": " + e.what());
  }
  throw InstanceError("instance \"" + id + "\" has neither a file nor a generator");
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw InstanceError("trials must be >= 1");
  if (jobs < 1) throw InstanceError("jobs must be >= 1");
  if (instances.empty()) throw InstanceError("no instances configured");
  if (algorithms.empty()) throw InstanceError("no algorithms configured");
  if (alphas.empty()) throw InstanceError("alpha list is empty");
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw InstanceError("alpha values must lie in [0, 1]");
  }
  std::set<std::string> seen;
  for (const auto& p : algorithms) {
    p.validate();
    if (!seen.insert(p.name).second) throw InstanceError("duplicate preset name \"" + p.name + "\"");
  }
  seen.clear();
  for (const auto& s : instances) {
    check_name(s.id, "instance");
    if (!seen.insert(s.id).second) throw InstanceError("duplicate instance id \"" + s.id + "\"");
  }
}

ExperimentConfig experiment_config_from_json(const json& j, const fs::path& base_dir) {
  const std::string ctx = "experiment config";
  reject_unknown(j, {"instances", "algorithms", "trials", "base_seed", "alphas", "out_dir", "jobs"}, ctx);
  ExperimentConfig cfg;
  try {
    cfg.instances = instance_sources_from_json(require(j, "instances", ctx), base_dir);
    const auto& algs = require(j, "algorithms", ctx);
    if (!algs.is_array()) throw ParseError(ctx + ".algorithms: expected an array");
    for (const auto& a : algs) cfg.algorithms.push_back(preset_from_json(a));
    if (j.contains("trials")) cfg.trials = static_cast<int>(as_int(j["trials"], ctx + ".trials"));
    if (j.contains("base_seed")) cfg.base_seed = j["base_seed"].get<std::uint64_t>();
    if (j.contains("alphas")) cfg.alphas = j["alphas"].get<std::vector<double>>();
    if (j.contains("out_dir")) {
      fs::path p = j["out_dir"].get<std::string>();
      cfg.out_dir = p.is_relative() ? base_dir / p : p;
    }
    if (j.contains("jobs")) cfg.jobs = static_cast<int>(as_int(j["jobs"], ctx + ".jobs"));
  } catch (const json::exception& e) {
    throw ParseError(ctx + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig read_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open experiment config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return experiment_config_from_json(j, path.parent_path());
}

json to_json(const ExperimentConfig& cfg) {
  json instances = json::array();
  for (const auto& s : cfg.instances) {
    json e = {{"id", s.id}};
    if (s.file) e["file"] = s.file->string();
    if (s.generator) e["generator"] = to_json(*s.generator);
    instances.push_back(std::move(e));
  }
  json algorithms = json::array();
  for (const auto& p : cfg.algorithms) algorithms.push_back(to_json(p));
  return {{"instances", instances},     {"algorithms", algorithms}, {"trials", cfg.trials},
          {"base_seed", cfg.base_seed}, {"alphas", cfg.alphas},     {"out_dir", cfg.out_dir.string()},
          {"jobs", cfg.jobs}};
}

// ---------------------------------------------------------------- results CSV

std::string format_result_row(const ResultRow& r) {
  std::ostringstream out;
  out << r.algorithm << ',' << r.instance << ',' << r.trial << ',' << r.seed << ',' << r.cost.to_string()
      << ',' << r.generations << ',' << fixed(r.time_ms, 3);
  return out.str();
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows) out << format_result_row(r) << '\n';
}

std::vector<ResultRow> parse_results_csv(std::istream& in) {
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw ParseError("results CSV line " + std::to_string(line_no) + ": " + what);
  };
  auto strip_cr = [](std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  };
  if (!std::getline(in, line)) throw ParseError("results CSV is empty");
  ++line_no;
  strip_cr(line);
  if (line != kResultsHeader) fail("header must be \"" + std::string(kResultsHeader) + "\"");

  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 7) fail("expected 7 fields, found " + std::to_string(f.size()));
    auto integer = [&](const std::string& s, auto& out, const char* name) {
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
      if (ec != std::errc() || ptr != s.data() + s.size()) fail(std::string("bad ") + name + " \"" + s + "\"");
    };
    ResultRow r;
    r.algorithm = f[0];
    r.instance = f[1];
    if (r.algorithm.empty() || r.instance.empty()) fail("empty algorithm or instance");
    integer(f[2], r.trial, "trial");
    integer(f[3], r.seed, "seed");
    try {
      r.cost = ExtendedCost::parse(f[4]);
    } catch (const std::exception& e) {
      fail(e.what());
    }
    integer(f[5], r.generations, "generations");
    {
      const auto [ptr, ec] = std::from_chars(f[6].data(), f[6].data() + f[6].size(), r.time_ms);
      if (ec != std::errc() || ptr != f[6].data() + f[6].size()) fail("bad time_ms \"" + f[6] + "\"");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ResultRow> read_results_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open results file " + path.string());
  return parse_results_csv(in);
}

std::vector<TrialSet> to_trial_sets(const std::vector<ResultRow>& rows) {
  std::vector<TrialSet> sets;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& r : rows) {
    auto [it, inserted] = index.try_emplace({r.algorithm, r.instance}, sets.size());
    if (inserted) sets.push_back({r.algorithm, r.instance, {}});
    sets[it->second].costs.push_back(r.cost);
  }
  return sets;
}

// ---------------------------------------------------------------- experiment

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();

  std::vector<ProblemInstance> instances;
  instances.reserve(cfg.instances.size());
  for (const auto& s : cfg.instances) instances.push_back(s.load());

  std::error_code ec;
  fs::create_directories(cfg.out_dir / "instances", ec);
  if (ec) throw std::runtime_error("cannot create output directory " + cfg.out_dir.string() + ": " + ec.message());
  ExperimentOutcome outcome;
  outcome.results_file = cfg.out_dir / "results.csv";
  std::ofstream csv(outcome.results_file, std::ios::binary | std::ios::trunc);
  if (!csv) throw std::runtime_error("cannot write " + outcome.results_file.string());
  csv << kResultsHeader << '\n' << std::flush;
  if (!csv) throw std::runtime_error("cannot write " + outcome.results_file.string());

  for (std::size_t q = 0; q < instances.size(); ++q) {
    write_instance(instances[q], cfg.out_dir / "instances" / (cfg.instances[q].id + ".json"));
  }
  write_text_file(cfg.out_dir / "config.json", to_json(cfg).dump(2) + "\n");

  struct Task {
    std::size_t algorithm;
    std::size_t instance;
    int trial;
  };
  std::vector<Task> tasks;
  for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
    for (std::size_t q = 0; q < instances.size(); ++q) {
      for (int t = 0; t < cfg.trials; ++t) tasks.push_back({a, q, t});
    }
  }

  std::vector<std::optional<ResultRow>> slots(tasks.size());
  std::size_t written = 0;
  std::mutex sink;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t k = next.fetch_add(1);
      if (k >= tasks.size()) return;
      const Task& task = tasks[k];
      try {
        const auto& preset = cfg.algorithms[task.algorithm];
        const auto& id = cfg.instances[task.instance].id;
        ResultRow row;
        row.algorithm = preset.name;
        row.instance = id;
        row.trial = task.trial;
        row.seed = trial_seed(cfg.base_seed, preset.name, id, task.trial);
        const TrialResult result = run_preset(preset, instances[task.instance], row.seed);
        row.cost = result.best;
        row.generations = result.generations;
        row.time_ms = result.wall_ms;

        std::lock_guard lock(sink);
        slots[k] = std::move(row);
        while (written < slots.size() && slots[written]) {
          csv << format_result_row(*slots[written]) << '\n';
          ++written;
        }
        csv.flush();
        if (!csv) throw std::runtime_error("error writing " + outcome.results_file.string());
      } catch (...) {
        std::lock_guard lock(sink);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };

  const int threads = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  outcome.rows.reserve(slots.size());
  for (auto& s : slots) outcome.rows.push_back(std::move(*s));
  return outcome;
}

// ---------------------------------------------------------------- compare

ComparisonOutcome compare_results(const std::vector<ResultRow>& rows, const std::vector<double>& alphas,
                                  const std::optional<fs::path>& out_dir) {
  if (alphas.empty()) throw InstanceError("alpha list is empty");
  if (rows.empty()) throw InstanceError("no result rows to compare");
  const auto sets = to_trial_sets(rows);

  ComparisonOutcome out;
  out.reports = overall_comparison(sets, alphas);

  std::vector<std::string> differing;
  for (std::size_t t = 1; t < out.reports.size(); ++t) {
    if (!same_conclusions(out.reports.front(), out.reports[t])) differing.push_back(fixed(alphas[t], 2));
  }
  out.stable = differing.empty();
  std::string alpha_list;
  for (std::size_t t = 0; t < alphas.size(); ++t) alpha_list += (t ? ", " : "") + fixed(alphas[t], 2);
  if (alphas.size() == 1) {
    out.stability = "single alpha (" + alpha_list + "); no stability comparison";
  } else if (out.stable) {
    out.stability = "stable: alpha in {" + alpha_list +
                    "} gives identical per-instance ranks and identical 5%-level verdicts for every pair";
  } else {
    std::string d;
    for (std::size_t t = 0; t < differing.size(); ++t) d += (t ? ", " : "") + differing[t];
    out.stability = "not stable: conclusions at alpha = " + d + " differ from alpha = " + fixed(alphas[0], 2);
  }

  if (out_dir) {
    std::error_code ec;
    fs::create_directories(*out_dir, ec);
    if (ec) throw std::runtime_error("cannot create " + out_dir->string() + ": " + ec.message());
    json index = {{"alphas", alphas}, {"stable", out.stable}, {"stability", out.stability}, {"reports", json::array()}};
    for (const auto& r : out.reports) {
      const std::string stem = "compare_alpha_" + fixed(r.alpha, 2);
      json j = to_json(r);
      j["stability"] = out.stability;
      const auto json_path = *out_dir / (stem + ".json");
      const auto text_path = *out_dir / (stem + ".txt");
      write_text_file(json_path, j.dump(2) + "\n");
      write_text_file(text_path, to_text(r) + "\nAlpha stability: " + out.stability + "\n");
      index["reports"].push_back({{"alpha", r.alpha}, {"json", json_path.filename().string()},
                                  {"text", text_path.filename().string()}});
      out.files.push_back(json_path);
      out.files.push_back(text_path);
    }
    const auto index_path = *out_dir / "compare.json";
    write_text_file(index_path, index.dump(2) + "\n");
    out.files.push_back(index_path);
  }
  return out;
}

// ---------------------------------------------------------------- summary

std::string_view to_string(Baseline baseline) {
  return baseline == Baseline::Exact ? "exact" : "best_known";
}

Baseline parse_baseline(std::string_view text) {
  if (text == "exact") return Baseline::Exact;
  if (text == "best_known" || text == "best-known") return Baseline::BestKnown;
  throw InstanceError("unknown baseline \"" + std::string(text) + "\" (expected exact or best_known)");
}

Outcome classify(const ExtendedCost& cost, std::optional<std::int64_t> baseline) {
  if (!cost.is_feasible()) return Outcome::Infeasible;
  if (!baseline) return Outcome::Worse;
  if (cost.cost() <= *baseline) return Outcome::Optimal;
  if (cost.cost() <= *baseline + 3) return Outcome::Within3;
  return Outcome::Worse;
}

SummaryClassification summarize(const std::vector<ResultRow>& rows, const SummaryOptions& options) {
  SummaryClassification s;
  s.requested = options.baseline;
  const auto sets = to_trial_sets(rows);

  std::vector<std::string> instance_order;
  std::map<std::string, std::optional<std::int64_t>> best_known;
  for (const auto& r : rows) {
    auto [it, inserted] = best_known.try_emplace(r.instance);
    if (inserted) instance_order.push_back(r.instance);
    if (r.cost.is_feasible() && (!it->second || r.cost.cost() < *it->second)) it->second = r.cost.cost();
  }

  std::map<std::string, InstanceBaseline> baselines;
  for (const auto& id : instance_order) {
    InstanceBaseline b;
    b.instance = id;
    auto use_best_known = [&] {
      b.cost = best_known[id];
      b.source = b.cost ? "best_known" : "none";
    };
    if (options.baseline == Baseline::BestKnown) {
      use_best_known();
    } else {
      if (!options.instance_dir) throw InstanceError("exact baseline needs the instance directory");
      const ProblemInstance inst = read_instance(*options.instance_dir / (id + ".json"));
      const ExactResult exact = exact_solve(inst, options.limits);
      switch (exact.status) {
        case ExactStatus::Optimal:
          b.cost = exact.cost;
          b.source = "exact";
          break;
        case ExactStatus::ProvenInfeasible:
          b.source = "exact";
          b.note = "proven infeasible";
          break;
        case ExactStatus::BudgetExceeded:
          use_best_known();
          b.warning = true;
          b.note = "exact solve exceeded its budget after " + std::to_string(exact.nodes) +
                   " nodes; using best-known";
          break;
      }
      if (b.source == "exact" && best_known[id] && (!b.cost || *best_known[id] < *b.cost)) {
        b.warning = true;
        b.note = "a trial beats the exact baseline; results and instance file disagree";
      }
    }
    s.warning = s.warning || b.warning;
    baselines[id] = b;
    s.baselines.push_back(b);
  }

  for (const auto& set : sets) {
    SummaryCell cell;
    cell.algorithm = set.algorithm;
    cell.instance = set.instance;
    const auto& baseline = baselines.at(set.instance).cost;
    for (const auto& c : set.costs) {
      switch (classify(c, baseline)) {
        case Outcome::Infeasible: ++cell.infeasible; break;
        case Outcome::Optimal: ++cell.optimal; break;
        case Outcome::Within3: ++cell.within_3; break;
        case Outcome::Worse: ++cell.worse; break;
      }
    }
    s.cells.push_back(cell);
  }
  return s;
}

json to_json(const SummaryClassification& s) {
  json baselines = json::array();
  for (const auto& b : s.baselines) {
    baselines.push_back({{"instance", b.instance},
                         {"cost", b.cost ? json(*b.cost) : json(nullptr)},
                         {"source", b.source},
                         {"warning", b.warning},
                         {"note", b.note}});
  }
  json cells = json::array();
  for (const auto& c : s.cells) {
    cells.push_back({{"algorithm", c.algorithm},
                     {"instance", c.instance},
                     {"infeasible", c.infeasible},
                     {"optimal", c.optimal},
                     {"within_3", c.within_3},
                     {"worse", c.worse},
                     {"trials", c.total()}});
  }
  return {{"baseline", to_string(s.requested)}, {"warning", s.warning}, {"baselines", baselines}, {"cells", cells}};
}

std::string to_text(const SummaryClassification& s) {
  std::size_t wa = 9;
  std::size_t wi = 8;
  for (const auto& c : s.cells) {
    wa = std::max(wa, c.algorithm.size());
    wi = std::max(wi, c.instance.size());
  }
  std::ostringstream out;
  out << "Baseline: " << to_string(s.requested) << (s.warning ? "  (WARNING: see notes)" : "") << "\n\n";
  out << std::left << std::setw(static_cast<int>(wi + 2)) << "instance" << std::setw(12) << "baseline"
      << "source\n";
  for (const auto& b : s.baselines) {
    out << std::left << std::setw(static_cast<int>(wi + 2)) << b.instance << std::setw(12)
        << (b.cost ? std::to_string(*b.cost) : std::string("-")) << b.source;
    if (!b.note.empty()) out << "  " << (b.warning ? "WARNING: " : "") << b.note;
    out << "\n";
  }
  out << "\n"
      << std::left << std::setw(static_cast<int>(wa + 2)) << "algorithm" << std::setw(static_cast<int>(wi + 2))
      << "instance" << std::right << std::setw(11) << "infeasible" << std::setw(9) << "optimal" << std::setw(10)
      << "within-3" << std::setw(7) << "worse" << "\n";
  for (const auto& c : s.cells) {
    out << std::left << std::setw(static_cast<int>(wa + 2)) << c.algorithm << std::setw(static_cast<int>(wi + 2))
        << c.instance << std::right << std::setw(11) << c.infeasible << std::setw(9) << c.optimal << std::setw(10)
        << c.within_3 << std::setw(7) << c.worse << "\n";
  }
  return out.str();
}

std::string plot_data_csv(const SummaryClassification& s) {
  std::map<std::string, const InstanceBaseline*> by_id;
  for (const auto& b : s.baselines) by_id[b.instance] = &b;
  std::ostringstream out;
  out << "algorithm,instance,baseline,baseline_source,infeasible,optimal,within_3,worse\n";
  for (const auto& c : s.cells) {
    const auto* b = by_id.at(c.instance);
    out << c.algorithm << ',' << c.instance << ',' << (b->cost ? std::to_string(*b->cost) : std::string())
        << ',' << b->source << ',' << c.infeasible << ',' << c.optimal << ',' << c.within_3 << ',' << c.worse
        << '\n';
  }
  return out.str();
}

SummaryClassification emit_summary(const std::vector<ResultRow>& rows, const SummaryOptions& options,
                                   const fs::path& out_dir) {
  SummaryClassification s = summarize(rows, options);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
  write_text_file(out_dir / "summary.json", to_json(s).dump(2) + "\n");
  write_text_file(out_dir / "summary.txt", to_text(s));
  write_text_file(out_dir / "summary_plot.csv", plot_data_csv(s));
  return s;
}

}  // namespace roster
