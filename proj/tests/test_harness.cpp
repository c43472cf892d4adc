#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "roster/harness.hpp"
#include "support.hpp"

namespace roster {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("roster_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Results text with the time_ms column cut off.
std::string without_times(const std::string& csv) {
  std::stringstream in(csv);
  std::string out;
  std::string line;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

AlgorithmPreset quick(std::string_view base, int generations = 8, int population = 12) {
  auto p = builtin_preset(base);
  p.ga.generations = generations;
  p.ga.population = population;
  return p;
}

ExperimentConfig small_experiment(const fs::path& out) {
  ExperimentConfig cfg;
  for (int i = 0; i < 3; ++i) {
    InstanceSource src;
    src.id = "tiny-" + std::to_string(i);
    src.generator = GeneratorConfig::tiny(4, 10 + i);
    cfg.instances.push_back(src);
  }
  cfg.algorithms = {quick("V6"), quick("V4")};
  cfg.trials = 5;
  cfg.base_seed = 99;
  cfg.alphas = {0.5, 1.0};
  cfg.out_dir = out;
  return cfg;
}

TEST(Presets, AllVariantsPresentAndValid) {
  const auto& all = builtin_presets();
  ASSERT_EQ(all.size(), 24U);
  std::set<std::string> names;
  for (const auto& p : all) {
    names.insert(p.name);
    EXPECT_NO_THROW(p.validate()) << p.name;
    EXPECT_FALSE(p.specified.empty() && p.decided.empty()) << p.name;
  }
  for (char family : {'V', 'U', 'W'}) {
    for (int i = 1; i <= 8; ++i) EXPECT_TRUE(names.count(std::string(1, family) + std::to_string(i)));
  }
  EXPECT_EQ(builtin_preset("V6").encoding, Encoding::Direct);
  EXPECT_EQ(builtin_preset("V8").ga.hillclimber, true);
  EXPECT_EQ(builtin_preset("V7").ga.islands.count, 4);
  EXPECT_EQ(builtin_preset("V2").decoder.bound, DecoderBound::None);
  EXPECT_EQ(builtin_preset("V1").decoder.bound, DecoderBound::LookAhead);
  EXPECT_EQ(builtin_preset("U5").ga.auto_weights, true);
  EXPECT_EQ(builtin_preset("W6").ga.crossover.kind, CrossoverKind::RankBiased);
  EXPECT_EQ(builtin_preset("W7").ga.crossover.kind, CrossoverKind::FitnessBiased);
  EXPECT_THROW(builtin_preset("V9"), InstanceError);
}

TEST(Presets, JsonRoundTripAndOverrides) {
  for (const auto& p : builtin_presets()) {
    const auto back = preset_from_json(to_json(p));
    EXPECT_EQ(to_json(back), to_json(p)) << p.name;
  }
  EXPECT_EQ(preset_from_json("U3").name, "U3");
  const auto custom = preset_from_json({{"name", "fast-v4"}, {"base", "V4"}, {"ga", {{"generations", 7}}}});
  EXPECT_EQ(custom.name, "fast-v4");
  EXPECT_EQ(custom.ga.generations, 7);
  EXPECT_EQ(custom.ga.population, builtin_preset("V4").ga.population);
  EXPECT_EQ(custom.decoder.bound, builtin_preset("V4").decoder.bound);
  EXPECT_THROW(preset_from_json({{"name", "x"}, {"base", "V4"}, {"speed", 3}}), ParseError);
  EXPECT_THROW(preset_from_json("Z1"), std::exception);
}

TEST(TrialSeed, PureFunctionOfItsInputs) {
  EXPECT_EQ(trial_seed(1, "V1", "week1", 0), trial_seed(1, "V1", "week1", 0));
  std::set<std::uint64_t> seen;
  for (const char* alg : {"V1", "V2"}) {
    for (const char* inst : {"a", "b"}) {
      for (int t = 0; t < 10; ++t) seen.insert(trial_seed(7, alg, inst, t));
    }
  }
  EXPECT_EQ(seen.size(), 40U);
  const std::uint64_t s = derive_seed(derive_seed(7, "V1"), "a");
  EXPECT_EQ(trial_seed(7, "V1", "a", 3), mix64(s ^ mix64(3)));
}

TEST(ResultsCsv, RoundTripAndHeader) {
  std::vector<ResultRow> rows = {{"V1", "week1", 0, 12345, ExtendedCost::feasible(17), 200, 12.25},
                                 {"V1", "week1", 1, 999, ExtendedCost::infeasible(), 200, 3.0}};
  std::stringstream out;
  write_results_csv(out, rows);
  const auto text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), kResultsHeader);
  EXPECT_NE(text.find("V1,week1,1,999,INF,200,3.000"), std::string::npos);
  std::stringstream in(text);
  EXPECT_EQ(parse_results_csv(in), rows);
}

TEST(ResultsCsv, ParseErrorsNameTheLine) {
  const std::string header = std::string(kResultsHeader) + "\n";
  for (const std::string body : {"V1,w,0,1,abc,2,1.0\n", "V1,w,0,1,5,2\n", "V1,w,x,1,5,2,1.0\n", "V1,w,0,1,-4,2,1.0\n"}) {
    std::stringstream in(header + "V1,w,1,1,5,2,1.0\n" + body);
    try {
      parse_results_csv(in);
      FAIL() << body;
    } catch (const ParseError& e) {
      EXPECT_NE(std::string(e.what()).find('3'), std::string::npos) << e.what();
    }
  }
  std::stringstream bad_header("algorithm,instance,cost\n");
  EXPECT_THROW(parse_results_csv(bad_header), ParseError);
}

TEST(ExperimentConfigJson, ParsesInstancesAndRejectsUnknownKeys) {
  const nlohmann::json j = {
      {"instances",
       {"weeks/a.json", {{"id", "gen"}, {"generator", {{"preset", "tiny"}, {"nurses", 4}}}, {"count", 3}}}},
      {"algorithms", {"V1", {{"name", "v4-short"}, {"base", "V4"}, {"ga", {{"generations", 5}}}}}},
      {"trials", 4},
      {"alphas", {0.5, 1.0}}};
  const auto cfg = experiment_config_from_json(j, "/base");
  ASSERT_EQ(cfg.instances.size(), 4U);
  EXPECT_EQ(cfg.instances[0].id, "a");
  EXPECT_EQ(*cfg.instances[0].file, fs::path("/base/weeks/a.json"));
  EXPECT_EQ(cfg.instances[1].id, "gen-01");
  EXPECT_EQ(cfg.instances[3].id, "gen-03");
  EXPECT_NE(cfg.instances[1].generator->seed, cfg.instances[2].generator->seed);
  EXPECT_EQ(cfg.algorithms.size(), 2U);
  EXPECT_EQ(cfg.trials, 4);
  EXPECT_THROW(experiment_config_from_json({{"trails", 4}}), ParseError);

  auto bad = cfg;
  bad.trials = 0;
  EXPECT_THROW(bad.validate(), InstanceError);
  bad = cfg;
  bad.alphas = {1.2};
  EXPECT_THROW(bad.validate(), InstanceError);
  bad = cfg;
  bad.algorithms.push_back(bad.algorithms[0]);
  EXPECT_THROW(bad.validate(), InstanceError);
}

TEST(RunExperiment, GridShapeAndDeterministicReplay) {
  const auto dir = scratch("replay");
  auto cfg = small_experiment(dir / "a");
  const auto a = run_experiment(cfg);
  ASSERT_EQ(a.rows.size(), 30U);
  int index = 0;
  for (const auto& alg : {"V6", "V4"}) {
    for (int p = 0; p < 3; ++p) {
      for (int t = 0; t < 5; ++t, ++index) {
        const auto& r = a.rows[index];
        ASSERT_EQ(r.algorithm, alg);
        ASSERT_EQ(r.instance, "tiny-" + std::to_string(p));
        ASSERT_EQ(r.trial, t);
        ASSERT_EQ(r.seed, trial_seed(99, alg, r.instance, t));
        ASSERT_EQ(r.generations, 8);
      }
    }
  }
  auto reread = read_results_csv(a.results_file);
  ASSERT_EQ(reread.size(), a.rows.size());
  for (std::size_t i = 0; i < reread.size(); ++i) {
    EXPECT_NEAR(reread[i].time_ms, a.rows[i].time_ms, 5e-4);
    reread[i].time_ms = a.rows[i].time_ms;
  }
  EXPECT_EQ(reread, a.rows);
  EXPECT_TRUE(fs::exists(dir / "a" / "instances" / "tiny-0.json"));

  cfg.out_dir = dir / "b";
  cfg.jobs = 3;
  const auto b = run_experiment(cfg);
  EXPECT_EQ(without_times(slurp(a.results_file)), without_times(slurp(b.results_file)));
  fs::remove_all(dir);
}

TEST(RunExperiment, FailsFastBeforeAnyTrial) {
  const auto dir = scratch("failfast");
  auto cfg = small_experiment(dir / "out");
  InstanceSource missing;
  missing.id = "missing";
  missing.file = dir / "nope.json";
  cfg.instances.push_back(missing);
  EXPECT_THROW(run_experiment(cfg), std::exception);
  EXPECT_FALSE(fs::exists(dir / "out" / "results.csv"));

  cfg = small_experiment(dir / "out");
  cfg.algorithms[0].ga.population = 0;
  EXPECT_THROW(run_experiment(cfg), InstanceError);
  EXPECT_FALSE(fs::exists(dir / "out" / "results.csv"));

  // The output path is a regular file.
  std::ofstream(dir / "file") << "x";
  cfg = small_experiment(dir / "file");
  EXPECT_THROW(run_experiment(cfg), std::exception);
  fs::remove_all(dir);
}

TEST(RunExperiment, UnboundedDirectGaLeavesInfeasibleTrialsOnTightInstances) {
  const auto dir = scratch("tight");
  ExperimentConfig cfg;
  InstanceSource src;
  src.id = "tight";
  auto gen = GeneratorConfig::desk();
  gen.tightness = 1.0;
  src.generator = gen;
  cfg.instances = {src};
  cfg.algorithms = {quick("V6", 5, 10)};
  cfg.trials = 10;
  cfg.out_dir = dir;
  const auto out = run_experiment(cfg);
  int inf = 0;
  for (const auto& r : out.rows) inf += !r.cost.is_feasible();
  EXPECT_GT(inf, 0);
  fs::remove_all(dir);
}

TEST(CompareResults, EmittedResultsAlwaysCompareAndWriteReports) {
  const auto dir = scratch("compare");
  auto cfg = small_experiment(dir);
  const auto rows = run_experiment(cfg).rows;
  const auto cmp = compare_results(rows, {0.5, 1.0}, dir);
  ASSERT_EQ(cmp.reports.size(), 2U);
  EXPECT_FALSE(cmp.stability.empty());
  EXPECT_TRUE(fs::exists(dir / "compare_alpha_0.50.json"));
  EXPECT_TRUE(fs::exists(dir / "compare_alpha_1.00.txt"));
  EXPECT_TRUE(fs::exists(dir / "compare.json"));
  const auto j = nlohmann::json::parse(slurp(dir / "compare.json"));
  EXPECT_TRUE(j.contains("stable"));

  auto missing = rows;
  std::erase_if(missing, [](const ResultRow& r) { return r.algorithm == "V4" && r.instance == "tiny-2"; });
  try {
    compare_results(missing, {1.0});
    FAIL() << "expected an error";
  } catch (const InstanceError& e) {
    EXPECT_NE(std::string(e.what()).find("tiny-2"), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(CompareResults, GoldenCostsGiveStableVerdicts) {
  const auto rows = read_results_csv(testing::data_dir() / "costs_weeks1-3.csv");
  const auto cmp = compare_results(rows, {0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
  EXPECT_TRUE(cmp.stable) << cmp.stability;
  EXPECT_EQ(cmp.reports[0].algorithms.size(), 8U);
}

TEST(Classify, Boundaries) {
  EXPECT_EQ(classify(ExtendedCost::infeasible(), 5), Outcome::Infeasible);
  EXPECT_EQ(classify(ExtendedCost::feasible(5), 5), Outcome::Optimal);
  EXPECT_EQ(classify(ExtendedCost::feasible(8), 5), Outcome::Within3);
  EXPECT_EQ(classify(ExtendedCost::feasible(9), 5), Outcome::Worse);
  EXPECT_EQ(classify(ExtendedCost::feasible(9), std::nullopt), Outcome::Worse);
}

TEST(Summary, ExactBaselineClassification) {
  const auto dir = scratch("summary");
  // Optimum 0: each nurse has a free pattern and nothing is demanded.
  const auto inst = testing::make_instance(1, {{1, {ContractType::Days, 1}}, {1, {ContractType::Days, 1}}},
                                           {"10000000000000", "01000000000000"}, {{0, 3}, {4, 0}}, {});
  write_instance(inst, dir / "zero.json");
  std::vector<ResultRow> rows;
  const std::vector<ExtendedCost> costs = {ExtendedCost::feasible(0), ExtendedCost::feasible(2),
                                           ExtendedCost::feasible(3), ExtendedCost::feasible(4),
                                           ExtendedCost::infeasible()};
  for (int t = 0; t < 5; ++t) rows.push_back({"G", "zero", t, 0, costs[t], 1, 0.0});
  for (int t = 0; t < 5; ++t) rows.push_back({"H", "zero", t, 0, ExtendedCost::infeasible(), 1, 0.0});

  SummaryOptions opt;
  opt.baseline = Baseline::Exact;
  opt.instance_dir = dir;
  const auto s = emit_summary(rows, opt, dir / "out");
  ASSERT_EQ(s.baselines.size(), 1U);
  EXPECT_EQ(s.baselines[0].cost, 0);
  EXPECT_EQ(s.baselines[0].source, "exact");
  ASSERT_EQ(s.cells.size(), 2U);
  EXPECT_EQ(s.cells[0].optimal, 1);
  EXPECT_EQ(s.cells[0].within_3, 2);
  EXPECT_EQ(s.cells[0].worse, 1);
  EXPECT_EQ(s.cells[0].infeasible, 1);
  EXPECT_EQ(s.cells[1].infeasible, 5);
  EXPECT_EQ(s.cells[1].total(), 5);
  EXPECT_FALSE(s.warning);
  const auto plot = slurp(dir / "out" / "summary_plot.csv");
  EXPECT_EQ(plot.substr(0, plot.find('\n')),
            "algorithm,instance,baseline,baseline_source,infeasible,optimal,within_3,worse");
  EXPECT_TRUE(fs::exists(dir / "out" / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "summary.txt"));
  fs::remove_all(dir);
}

TEST(Summary, BestKnownAndBudgetFallback) {
  const auto dir = scratch("fallback");
  write_instance(generate_instance(GeneratorConfig::desk()), dir / "desk.json");
  std::vector<ResultRow> rows;
  for (int t = 0; t < 4; ++t) rows.push_back({"A", "desk", t, 0, ExtendedCost::feasible(50 + t), 1, 0.0});
  SummaryOptions opt;
  EXPECT_EQ(summarize(rows, opt).baselines[0].cost, 50);
  EXPECT_EQ(summarize(rows, opt).cells[0].within_3, 3);

  opt.baseline = Baseline::Exact;
  opt.instance_dir = dir;
  opt.limits.max_nodes = 5;
  const auto s = summarize(rows, opt);
  EXPECT_TRUE(s.warning);
  EXPECT_TRUE(s.baselines[0].warning);
  EXPECT_EQ(s.baselines[0].source, "best_known");
  EXPECT_EQ(s.baselines[0].cost, 50);
  for (const auto& c : s.cells) EXPECT_EQ(c.total(), 4);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace roster
