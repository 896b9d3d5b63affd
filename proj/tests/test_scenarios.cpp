// Scenario presets, runs, comparisons and emitted artifacts.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mgrao/scenarios.hpp"

namespace {

namespace fs = std::filesystem;

using mgrao::AlgorithmVariant;
using mgrao::compare;
using mgrao::ComparisonSummary;
using mgrao::emit;
using mgrao::EmitFormat;
using mgrao::final_cumulative;
using mgrao::MetricsRecord;
using mgrao::run_comparison;
using mgrao::run_scenario;
using mgrao::RunDiagnostics;
using mgrao::ScenarioConfig;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mgrao_tests" / name;
  fs::remove_all(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Synthetic records: |variants| x |seeds| x episodes rows with affine
// utilities, cheap and fully controlled.
std::vector<MetricsRecord> synthetic_records(const std::vector<std::string>& variants,
                                             const std::vector<std::uint64_t>& seeds,
                                             int episodes,
                                             const std::vector<double>& per_episode) {
  std::vector<MetricsRecord> records;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    for (std::uint64_t seed : seeds) {
      double cumulative = 0.0;
      for (int e = 0; e < episodes; ++e) {
        cumulative += per_episode[v];
        records.push_back({"demo", variants[v], seed, e, per_episode[v], cumulative});
      }
    }
  }
  return records;
}

TEST(AlgorithmVariant, Labels) {
  EXPECT_EQ(AlgorithmVariant::fixed_uniform().label(10), "fixed-uniform");
  EXPECT_EQ(AlgorithmVariant::mgrao(10).label(10), "mgrao-max");
  EXPECT_EQ(AlgorithmVariant::mgrao(1).label(10), "mgrao-1:1");
  EXPECT_EQ(AlgorithmVariant::mgrao(5).label(10), "mgrao-5:1");
}

TEST(AlgorithmVariant, ParseRoundTrip) {
  EXPECT_EQ(AlgorithmVariant::parse("fixed-uniform", 10), AlgorithmVariant::fixed_uniform());
  EXPECT_EQ(AlgorithmVariant::parse("uniform", 10), AlgorithmVariant::fixed_uniform());
  EXPECT_EQ(AlgorithmVariant::parse("mgrao-max", 10), AlgorithmVariant::mgrao(10));
  EXPECT_EQ(AlgorithmVariant::parse("mgrao-1:1", 10), AlgorithmVariant::mgrao(1));
  EXPECT_EQ(AlgorithmVariant::parse("mgrao-25:1", 50), AlgorithmVariant::mgrao(25));
}

TEST(AlgorithmVariant, ParseRejectsJunk) {
  EXPECT_THROW(AlgorithmVariant::parse("mgrao", 10), std::invalid_argument);
  EXPECT_THROW(AlgorithmVariant::parse("mgrao-x:1", 10), std::invalid_argument);
  EXPECT_THROW(AlgorithmVariant::parse("mgrao-2:3", 10), std::invalid_argument);
  EXPECT_THROW(AlgorithmVariant::parse("", 10), std::invalid_argument);
  EXPECT_THROW(AlgorithmVariant::mgrao(0), std::invalid_argument);
}

TEST(ScenarioConfig, PresetsMatchTheFourSystems) {
  const auto single = ScenarioConfig::single();
  EXPECT_EQ(single.name, "single");
  EXPECT_EQ(single.parents, 10);
  EXPECT_EQ(single.children, 1);
  EXPECT_EQ(single.task_types, 20);
  EXPECT_EQ(single.composite_types, 10);
  EXPECT_EQ(single.composite_size, 5);
  EXPECT_EQ(single.resources, 1);
  EXPECT_EQ(single.epsilon, 0.0);
  EXPECT_EQ(single.churn_probability, 0.0);
  EXPECT_EQ(single.alpha, 0.1);
  EXPECT_EQ(single.gamma, 0.9);
  EXPECT_EQ(single.episodes, 100);
  ASSERT_EQ(single.seeds.size(), 20u);
  EXPECT_EQ(single.seeds.front(), 0u);
  EXPECT_EQ(single.seeds.back(), 19u);

  const auto multi = ScenarioConfig::multi();
  EXPECT_EQ(multi.name, "multi");
  EXPECT_EQ(multi.children, 3);
  EXPECT_EQ(multi.epsilon, 0.1);

  const auto volatile_cfg = ScenarioConfig::volatile_system();
  EXPECT_EQ(volatile_cfg.name, "volatile");
  EXPECT_EQ(volatile_cfg.churn_probability, 0.25);

  const auto large = ScenarioConfig::large();
  EXPECT_EQ(large.name, "large");
  EXPECT_EQ(large.parents, 50);
  EXPECT_EQ(large.group_sizes, (std::vector<int>{1, 2, 5, 10, 25, 50}));
}

TEST(ScenarioConfig, ByName) {
  EXPECT_EQ(ScenarioConfig::by_name("multi").name, "multi");
  EXPECT_EQ(ScenarioConfig::by_name("volatile").churn_probability, 0.25);
  EXPECT_THROW(ScenarioConfig::by_name("bogus"), std::invalid_argument);
}

TEST(ScenarioConfig, ValidateRejectsBadValues) {
  auto cfg = ScenarioConfig::single();
  cfg.episodes = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = ScenarioConfig::single();
  cfg.alpha = 1.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = ScenarioConfig::single();
  cfg.gamma = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = ScenarioConfig::single();
  cfg.seeds.clear();
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = ScenarioConfig::single();
  cfg.group_sizes = {11};  // larger than the parent count
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = ScenarioConfig::single();
  cfg.composite_size = 25;  // larger than the type count
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

ScenarioConfig tiny_single() {
  ScenarioConfig cfg = ScenarioConfig::single();
  cfg.episodes = 10;
  cfg.seeds = {0, 1};
  return cfg;
}

TEST(RunScenario, ProducesOrderedRecordsWithPrefixSums) {
  const auto records = run_scenario(tiny_single(), AlgorithmVariant::fixed_uniform());
  ASSERT_EQ(records.size(), 20u);
  double cumulative = 0.0;
  for (int e = 0; e < 10; ++e) {
    const auto& r = records[e];
    EXPECT_EQ(r.scenario, "single");
    EXPECT_EQ(r.variant, "fixed-uniform");
    EXPECT_EQ(r.seed, 0u);
    EXPECT_EQ(r.episode, e);
    cumulative += r.utility;
    EXPECT_NEAR(r.cumulative, cumulative, 1e-12);
  }
  EXPECT_EQ(records[10].seed, 1u);
  EXPECT_EQ(records[10].episode, 0);
}

TEST(RunScenario, DeterministicAcrossCalls) {
  RunDiagnostics diag;
  const auto a = run_scenario(tiny_single(), AlgorithmVariant::mgrao(10), &diag);
  const auto b = run_scenario(tiny_single(), AlgorithmVariant::mgrao(10));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].utility, b[i].utility);
    EXPECT_EQ(a[i].cumulative, b[i].cumulative);
  }
  EXPECT_LE(diag.max_conservation_error, 1e-9);
}

TEST(RunScenario, RejectsBadGroupCounts) {
  EXPECT_THROW(run_scenario(tiny_single(), AlgorithmVariant::mgrao(11)),
               std::invalid_argument);
}

TEST(RunComparison, JobCountDoesNotChangeOutput) {
  ScenarioConfig cfg = tiny_single();
  cfg.episodes = 5;
  const std::vector<AlgorithmVariant> variants{
      AlgorithmVariant::fixed_uniform(), AlgorithmVariant::mgrao(1), AlgorithmVariant::mgrao(10)};
  const auto serial = run_comparison(cfg, variants, 1);
  const auto parallel = run_comparison(cfg, variants, 3);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].variant, parallel[i].variant);
    EXPECT_EQ(serial[i].seed, parallel[i].seed);
    EXPECT_EQ(serial[i].episode, parallel[i].episode);
    EXPECT_EQ(serial[i].utility, parallel[i].utility);
  }
}

TEST(FinalCumulative, PicksLastEpisodePerSeed) {
  const auto records =
      synthetic_records({"fixed-uniform"}, {3, 1, 2}, 4, {2.0});
  const auto finals = final_cumulative(records, "fixed-uniform");
  ASSERT_EQ(finals.size(), 3u);  // seeds ascending: 1, 2, 3
  for (double v : finals) EXPECT_NEAR(v, 8.0, 1e-12);
  EXPECT_THROW(final_cumulative(records, "mgrao-max"), std::invalid_argument);
}

TEST(Compare, ComputesPairedPercentages) {
  const auto records = synthetic_records({"fixed-uniform", "mgrao-max", "mgrao-1:1"},
                                         {0, 1}, 3, {1.0, 1.5, 1.2});
  const auto summary = compare(records);
  EXPECT_EQ(summary.scenario, "demo");
  EXPECT_EQ(summary.episodes, 3);
  ASSERT_EQ(summary.variants.size(), 3u);
  EXPECT_EQ(summary.variants[0].variant, "fixed-uniform");  // first appearance order
  EXPECT_EQ(summary.variants[1].variant, "mgrao-max");
  EXPECT_EQ(summary.variants[2].variant, "mgrao-1:1");

  const auto& uniform = summary.variants[0];
  EXPECT_EQ(uniform.runs, 2);
  EXPECT_NEAR(uniform.mean_cumulative, 3.0, 1e-12);
  ASSERT_TRUE(uniform.pct_vs_uniform.has_value());
  EXPECT_NEAR(*uniform.pct_vs_uniform, 0.0, 1e-12);
  ASSERT_TRUE(uniform.pct_of_max.has_value());
  EXPECT_NEAR(*uniform.pct_of_max, 100.0 / 1.5, 1e-9);

  const auto& best = summary.variants[1];
  ASSERT_TRUE(best.pct_vs_uniform.has_value());
  EXPECT_NEAR(*best.pct_vs_uniform, 50.0, 1e-9);
  EXPECT_NEAR(*best.pct_of_max, 100.0, 1e-12);

  const auto& mid = summary.variants[2];
  EXPECT_NEAR(*mid.pct_vs_uniform, 20.0, 1e-9);
  EXPECT_NEAR(*mid.pct_vs_max, 100.0 * (1.2 - 1.5) / 1.5, 1e-9);
}

TEST(Compare, RejectsMixedOrUnpairedInput) {
  auto records = synthetic_records({"a"}, {0}, 2, {1.0});
  auto other = synthetic_records({"a"}, {0}, 2, {1.0});
  other.front().scenario = "elsewhere";
  records.push_back(other.front());
  EXPECT_THROW(compare(records), std::invalid_argument);

  auto unpaired = synthetic_records({"a", "b"}, {0, 1}, 2, {1.0, 1.0});
  unpaired.erase(std::remove_if(unpaired.begin(), unpaired.end(),
                                [](const MetricsRecord& r) {
                                  return r.variant == "b" && r.seed == 1;
                                }),
                 unpaired.end());
  EXPECT_THROW(compare(unpaired), std::invalid_argument);
}

TEST(Compare, EmptyInputGivesEmptySummary) {
  const auto summary = compare({});
  EXPECT_TRUE(summary.variants.empty());
}

TEST(Emit, WritesCombinedPerRunAndSummaryFiles) {
  const auto records = synthetic_records({"fixed-uniform", "mgrao-max", "mgrao-1:1"},
                                         {0, 1}, 100, {1.0, 1.5, 1.2});
  const auto summary = compare(records);
  const auto dir = fresh_dir("emit_full");
  const auto written = emit(records, summary, EmitFormat::kBoth, dir);
  // records.csv + 6 per-run files + summary.json
  EXPECT_EQ(written.size(), 8u);
  const std::string combined = read_file(dir / "records.csv");
  // 600 data rows + header
  EXPECT_EQ(std::count(combined.begin(), combined.end(), '\n'), 601);
  EXPECT_TRUE(combined.starts_with(
      "scenario,variant,seed,episode,utility,cumulative_utility\n"));
  EXPECT_TRUE(fs::exists(dir / "demo_fixed-uniform_0.csv"));
  EXPECT_TRUE(fs::exists(dir / "demo_mgrao-max_1.csv"));
  EXPECT_TRUE(fs::exists(dir / "demo_mgrao-1:1_0.csv"));
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  const std::string per_run = read_file(dir / "demo_mgrao-max_1.csv");
  EXPECT_EQ(std::count(per_run.begin(), per_run.end(), '\n'), 101);
}

TEST(Emit, EmptyRecordsStillWriteHeader) {
  const auto dir = fresh_dir("emit_empty");
  const auto written = emit({}, ComparisonSummary{}, EmitFormat::kCsv, dir);
  ASSERT_EQ(written.size(), 1u);
  EXPECT_EQ(read_file(dir / "records.csv"),
            "scenario,variant,seed,episode,utility,cumulative_utility\n");
}

TEST(Emit, ByteIdenticalAcrossCalls) {
  const auto records =
      synthetic_records({"fixed-uniform", "mgrao-max"}, {0, 1}, 20, {1.0, 1.5});
  const auto summary = compare(records);
  const auto dir_a = fresh_dir("emit_det_a");
  const auto dir_b = fresh_dir("emit_det_b");
  emit(records, summary, EmitFormat::kBoth, dir_a);
  emit(records, summary, EmitFormat::kBoth, dir_b);
  EXPECT_EQ(read_file(dir_a / "records.csv"), read_file(dir_b / "records.csv"));
  EXPECT_EQ(read_file(dir_a / "summary.json"), read_file(dir_b / "summary.json"));
}

TEST(Emit, NineSignificantDigits) {
  std::vector<MetricsRecord> records{
      {"demo", "fixed-uniform", 0, 0, 0.123456789123456, 9.87654321987654}};
  const auto dir = fresh_dir("emit_digits");
  emit(records, compare(records), EmitFormat::kCsv, dir);
  const std::string body = read_file(dir / "records.csv");
  EXPECT_NE(body.find("0.123456789"), std::string::npos);
  EXPECT_NE(body.find("9.87654322"), std::string::npos);  // rounded at 9 digits
  EXPECT_EQ(body.find("0.1234567891"), std::string::npos);
}

TEST(Emit, JsonFormatWritesOnlySummary) {
  const auto records = synthetic_records({"fixed-uniform"}, {0}, 2, {1.0});
  const auto dir = fresh_dir("emit_json");
  const auto written = emit(records, compare(records), EmitFormat::kJson, dir);
  ASSERT_EQ(written.size(), 1u);
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  EXPECT_FALSE(fs::exists(dir / "records.csv"));
  const std::string body = read_file(dir / "summary.json");
  EXPECT_NE(body.find("\"scenario\": \"demo\""), std::string::npos);
  EXPECT_NE(body.find("\"variants\""), std::string::npos);
}

TEST(Emit, UnwritableDirectoryRaisesIoError) {
  const auto records = synthetic_records({"a"}, {0}, 1, {1.0});
  EXPECT_THROW(emit(records, compare(records), EmitFormat::kCsv, "/proc/nonexistent/nested"),
               mgrao::IoError);
}

TEST(SmallComparison, LearnerBeatsUniformBaseline) {
  ScenarioConfig cfg = ScenarioConfig::single();
  cfg.episodes = 60;
  cfg.seeds = {0, 1, 2, 3, 4};
  const auto records = run_comparison(
      cfg, {AlgorithmVariant::fixed_uniform(), AlgorithmVariant::mgrao(10)}, 1);
  const auto uniform = final_cumulative(records, "fixed-uniform");
  const auto learner = final_cumulative(records, "mgrao-max");
  double uniform_mean = 0.0, learner_mean = 0.0;
  for (double v : uniform) uniform_mean += v;
  for (double v : learner) learner_mean += v;
  EXPECT_GT(learner_mean, uniform_mean);
}

}  // namespace
