#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mgrao/environment.hpp"
#include "mgrao/format.hpp"
#include "mgrao/rng.hpp"
#include "mgrao/stats.hpp"

namespace mgrao {

// Thrown when emitted artifacts cannot be written; the CLI maps this to its
// own exit code so scripts can tell I/O failures from usage errors.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One comparison arm: either the fixed uniform-split baseline or the learner
// with a given number of parent groups.
struct AlgorithmVariant {
  bool use_learner = false;
  int groups = 1;

  static AlgorithmVariant fixed_uniform() { return {false, 1}; }
  static AlgorithmVariant mgrao(int groups) {
    if (groups < 1) throw std::invalid_argument("AlgorithmVariant: groups < 1");
    return {true, groups};
  }

  // Display labels: "fixed-uniform", "mgrao-max" (one group per parent), or
  // "mgrao-<g>:1" for g groups.
  std::string label(int parent_count) const {
    if (!use_learner) return "fixed-uniform";
    if (groups == parent_count) return "mgrao-max";
    return "mgrao-" + std::to_string(groups) + ":1";
  }

  static AlgorithmVariant parse(const std::string& label, int parent_count) {
    if (label == "fixed-uniform" || label == "uniform") return fixed_uniform();
    if (label == "mgrao-max") return mgrao(parent_count);
    const std::string prefix = "mgrao-";
    const std::string suffix = ":1";
    if (label.size() > prefix.size() + suffix.size() && label.starts_with(prefix) &&
        label.ends_with(suffix)) {
      const std::string digits =
          label.substr(prefix.size(), label.size() - prefix.size() - suffix.size());
      try {
        std::size_t used = 0;
        const int groups = std::stoi(digits, &used);
        if (used == digits.size()) return mgrao(groups);
      } catch (const std::exception&) {
        // fall through to the error below
      }
    }
    throw std::invalid_argument(
        "unknown variant '" + label +
        "' (expected fixed-uniform, mgrao-max or mgrao-<groups>:1)");
  }

  bool operator==(const AlgorithmVariant&) const = default;
};

// Full description of one evaluation setting. Presets mirror the four
// benchmark systems; every field can be overridden from the CLI.
struct ScenarioConfig {
  std::string name = "single";
  int parents = 10;
  int children = 1;
  int task_types = 20;
  int composite_types = 10;
  int composite_size = 5;
  int resources = 1;
  double epsilon = 0.0;            // child-selection exploration
  double churn_probability = 0.0;  // parent volatility
  double alpha = 0.1;
  double gamma = 0.9;
  int episodes = 100;
  std::vector<std::uint64_t> seeds = {0};
  std::vector<int> group_sizes = {1};  // parents per group, for sweeps

  WorldParams world_params() const {
    WorldParams p;
    p.parents = parents;
    p.children = children;
    p.task_types = task_types;
    p.composite_type_count = composite_types;
    p.composite_size = composite_size;
    p.resources = resources;
    return p;
  }

  void validate() const {
    world_params().validate();
    ChildSelectionPolicy{epsilon}.validate();
    VolatilityModel{churn_probability}.validate();
    LearnerConfig probe;
    probe.alpha = alpha;
    probe.gamma = gamma;
    probe.task_types = task_types;
    probe.validate();
    if (episodes < 1) throw std::invalid_argument("ScenarioConfig: episodes < 1");
    if (seeds.empty()) throw std::invalid_argument("ScenarioConfig: no seeds");
    if (group_sizes.empty()) throw std::invalid_argument("ScenarioConfig: no group sizes");
    for (int size : group_sizes) {
      if (size < 1 || size > parents)
        throw std::invalid_argument("ScenarioConfig: group size outside [1, parents]");
    }
  }

  static std::vector<std::uint64_t> default_seeds() {
    std::vector<std::uint64_t> seeds(20);
    for (std::uint64_t s = 0; s < seeds.size(); ++s) seeds[s] = s;
    return seeds;
  }

  // Ten parents, one child, no noise: the basic benchmark.
  static ScenarioConfig single() {
    ScenarioConfig cfg;
    cfg.name = "single";
    cfg.seeds = default_seeds();
    return cfg;
  }

  // Three children and mildly exploratory parents.
  static ScenarioConfig multi() {
    ScenarioConfig cfg = single();
    cfg.name = "multi";
    cfg.children = 3;
    cfg.epsilon = 0.1;
    return cfg;
  }

  // Parents churn in and out each episode.
  static ScenarioConfig volatile_system() {
    ScenarioConfig cfg = single();
    cfg.name = "volatile";
    cfg.churn_probability = 0.25;
    return cfg;
  }

  // Fifty parents; group sizes are swept.
  static ScenarioConfig large() {
    ScenarioConfig cfg = single();
    cfg.name = "large";
    cfg.parents = 50;
    cfg.group_sizes = {1, 2, 5, 10, 25, 50};
    return cfg;
  }

  static ScenarioConfig by_name(const std::string& name) {
    if (name == "single") return single();
    if (name == "multi") return multi();
    if (name == "volatile") return volatile_system();
    if (name == "large") return large();
    throw std::invalid_argument("unknown scenario '" + name +
                                "' (expected single, multi, volatile or large)");
  }
};

// One CSV row: per-episode utility of one run.
struct MetricsRecord {
  std::string scenario;
  std::string variant;
  std::uint64_t seed = 0;
  int episode = 0;
  double utility = 0.0;
  double cumulative = 0.0;
};

struct RunDiagnostics {
  double max_conservation_error = 0.0;
};

// Run one variant over every seed of the scenario. Identical seeds see an
// identical world and identical churn/selection draws whichever variant
// runs, which is what makes cross-variant comparisons paired.
inline std::vector<MetricsRecord> run_scenario(const ScenarioConfig& cfg,
                                               const AlgorithmVariant& variant,
                                               RunDiagnostics* diagnostics = nullptr) {
  cfg.validate();
  if (variant.use_learner && (variant.groups < 1 || variant.groups > cfg.parents))
    throw std::invalid_argument("run_scenario: learner groups outside [1, parents]");
  const std::string label = variant.label(cfg.parents);
  std::vector<MetricsRecord> records;
  records.reserve(cfg.seeds.size() * static_cast<std::size_t>(cfg.episodes));
  for (std::uint64_t seed : cfg.seeds) {
    std::mt19937_64 world_rng = make_rng(seed, RngStream::kWorld);
    World world = build_world(cfg.world_params(), world_rng);
    SimulationConfig sim_cfg;
    sim_cfg.use_learner = variant.use_learner;
    sim_cfg.learner_groups = variant.groups;
    sim_cfg.alpha = cfg.alpha;
    sim_cfg.gamma = cfg.gamma;
    sim_cfg.epsilon = cfg.epsilon;
    sim_cfg.churn_probability = cfg.churn_probability;
    sim_cfg.seed = seed;
    Simulation sim(std::move(world), sim_cfg);
    double cumulative = 0.0;
    for (int episode = 0; episode < cfg.episodes; ++episode) {
      const double utility = sim.run_episode();
      cumulative += utility;
      records.push_back({cfg.name, label, seed, episode, utility, cumulative});
    }
    if (diagnostics != nullptr) {
      diagnostics->max_conservation_error =
          std::max(diagnostics->max_conservation_error, sim.max_conservation_error());
    }
  }
  return records;
}

// Run several variants, optionally on several threads. Output order is fixed
// (variant-major, then seed, then episode) regardless of the thread count.
inline std::vector<MetricsRecord> run_comparison(const ScenarioConfig& cfg,
                                                 const std::vector<AlgorithmVariant>& variants,
                                                 int jobs = 1,
                                                 RunDiagnostics* diagnostics = nullptr) {
  cfg.validate();
  if (variants.empty()) throw std::invalid_argument("run_comparison: no variants");
  if (jobs < 1) throw std::invalid_argument("run_comparison: jobs < 1");

  std::vector<std::vector<MetricsRecord>> slots(variants.size());
  std::vector<RunDiagnostics> diags(variants.size());
  if (jobs == 1 || variants.size() == 1) {
    for (std::size_t v = 0; v < variants.size(); ++v)
      slots[v] = run_scenario(cfg, variants[v], &diags[v]);
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (;;) {
        const std::size_t v = next.fetch_add(1);
        if (v >= variants.size()) return;
        try {
          slots[v] = run_scenario(cfg, variants[v], &diags[v]);
        } catch (const std::exception& e) {
          std::scoped_lock lock(error_mutex);
          if (!failed.exchange(true)) first_error = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(jobs), variants.size());
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (failed) throw std::runtime_error("run_comparison: " + first_error);
  }

  std::vector<MetricsRecord> records;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    records.insert(records.end(), slots[v].begin(), slots[v].end());
    if (diagnostics != nullptr) {
      diagnostics->max_conservation_error = std::max(
          diagnostics->max_conservation_error, diags[v].max_conservation_error);
    }
  }
  return records;
}

// Final cumulative utility per seed (ascending seed order) for one variant.
inline std::vector<double> final_cumulative(const std::vector<MetricsRecord>& records,
                                            const std::string& variant) {
  std::map<std::uint64_t, std::pair<int, double>> best;  // seed -> (episode, cumulative)
  for (const MetricsRecord& r : records) {
    if (r.variant != variant) continue;
    auto [it, inserted] = best.try_emplace(r.seed, r.episode, r.cumulative);
    if (!inserted && r.episode > it->second.first) it->second = {r.episode, r.cumulative};
  }
  if (best.empty())
    throw std::invalid_argument("final_cumulative: no records for variant " + variant);
  std::vector<double> out;
  out.reserve(best.size());
  for (const auto& [seed, ec] : best) out.push_back(ec.second);
  return out;
}

struct VariantSummary {
  std::string variant;
  int runs = 0;
  double mean_cumulative = 0.0;
  double stddev_cumulative = 0.0;
  // Paired per-seed percentages, averaged; absent when the reference arm is
  // not part of the comparison.
  std::optional<double> pct_vs_uniform;
  std::optional<double> pct_vs_max;
  std::optional<double> pct_of_max;
};

struct ComparisonSummary {
  std::string scenario;
  int episodes = 0;
  std::vector<VariantSummary> variants;
};

// Reduce records to per-variant summaries. All variants must cover the same
// scenario and the same seed set, otherwise the comparison is unpaired and
// rejected.
inline ComparisonSummary compare(const std::vector<MetricsRecord>& records) {
  if (records.empty()) return {};
  ComparisonSummary summary;
  summary.scenario = records.front().scenario;

  std::vector<std::string> order;  // variant labels in first appearance order
  std::map<std::string, std::map<std::uint64_t, std::pair<int, double>>> finals;
  for (const MetricsRecord& r : records) {
    if (r.scenario != summary.scenario)
      throw std::invalid_argument("compare: records mix scenarios");
    if (finals.find(r.variant) == finals.end()) order.push_back(r.variant);
    auto& per_seed = finals[r.variant];
    auto [it, inserted] = per_seed.try_emplace(r.seed, r.episode, r.cumulative);
    if (!inserted && r.episode > it->second.first) it->second = {r.episode, r.cumulative};
    summary.episodes = std::max(summary.episodes, r.episode + 1);
  }

  const std::map<std::uint64_t, std::pair<int, double>>& first_seeds = finals[order.front()];
  for (const std::string& label : order) {
    const auto& per_seed = finals[label];
    if (per_seed.size() != first_seeds.size())
      throw std::invalid_argument("compare: variants cover different seed sets");
    for (const auto& [seed, ec] : per_seed) {
      if (first_seeds.find(seed) == first_seeds.end())
        throw std::invalid_argument("compare: variants cover different seed sets");
    }
  }

  const std::string uniform_label = AlgorithmVariant::fixed_uniform().label(0);
  const bool has_uniform = finals.find(uniform_label) != finals.end();
  const bool has_max = finals.find("mgrao-max") != finals.end();

  for (const std::string& label : order) {
    VariantSummary vs;
    vs.variant = label;
    std::vector<double> values;
    std::vector<double> vs_uniform, vs_max, of_max;
    for (const auto& [seed, ec] : finals[label]) {
      values.push_back(ec.second);
      if (has_uniform) {
        const double base = finals[uniform_label].at(seed).second;
        if (base > 0.0) vs_uniform.push_back(100.0 * (ec.second - base) / base);
      }
      if (has_max) {
        const double base = finals["mgrao-max"].at(seed).second;
        if (base > 0.0) {
          vs_max.push_back(100.0 * (ec.second - base) / base);
          of_max.push_back(100.0 * ec.second / base);
        }
      }
    }
    vs.runs = static_cast<int>(values.size());
    vs.mean_cumulative = mean(values);
    vs.stddev_cumulative = sample_stddev(values);
    if (!vs_uniform.empty()) vs.pct_vs_uniform = mean(vs_uniform);
    if (!vs_max.empty()) vs.pct_vs_max = mean(vs_max);
    if (!of_max.empty()) vs.pct_of_max = mean(of_max);
    summary.variants.push_back(std::move(vs));
  }
  return summary;
}

inline const char* kMetricsCsvHeader = "scenario,variant,seed,episode,utility,cumulative_utility";

enum class EmitFormat { kCsv, kJson, kBoth };

inline EmitFormat parse_emit_format(const std::string& name) {
  if (name == "csv") return EmitFormat::kCsv;
  if (name == "json") return EmitFormat::kJson;
  if (name == "both") return EmitFormat::kBoth;
  throw std::invalid_argument("unknown format '" + name + "' (expected csv, json or both)");
}

namespace detail {

inline void append_csv_row(std::string& out, const MetricsRecord& r) {
  out += r.scenario;
  out += ',';
  out += r.variant;
  out += ',';
  out += std::to_string(r.seed);
  out += ',';
  out += std::to_string(r.episode);
  out += ',';
  out += to_sig9(r.utility);
  out += ',';
  out += to_sig9(r.cumulative);
  out += '\n';
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

inline nlohmann::json summary_to_json(const ComparisonSummary& summary) {
  nlohmann::json doc;
  doc["scenario"] = summary.scenario;
  doc["episodes"] = summary.episodes;
  doc["variants"] = nlohmann::json::array();
  for (const VariantSummary& vs : summary.variants) {
    nlohmann::json row;
    row["variant"] = vs.variant;
    row["runs"] = vs.runs;
    row["mean_cumulative"] = vs.mean_cumulative;
    row["stddev_cumulative"] = vs.stddev_cumulative;
    if (vs.pct_vs_uniform) row["pct_vs_uniform"] = *vs.pct_vs_uniform;
    if (vs.pct_vs_max) row["pct_vs_max"] = *vs.pct_vs_max;
    if (vs.pct_of_max) row["pct_of_max"] = *vs.pct_of_max;
    doc["variants"].push_back(std::move(row));
  }
  return doc;
}

}  // namespace detail

// Write run artifacts into out_dir and return the paths written:
//   records.csv                         every record, one combined table
//   <scenario>_<variant>_<seed>.csv     the same rows split per run
//   summary.json                        the comparison summary
// CSV formats write the tables, JSON writes the summary, both writes both.
// An empty record list still produces a header-only records.csv. I/O
// problems (missing permissions, unwritable directory) raise IoError.
inline std::vector<std::filesystem::path> emit(const std::vector<MetricsRecord>& records,
                                               const ComparisonSummary& summary,
                                               EmitFormat format,
                                               const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string());

  std::vector<std::filesystem::path> written;
  const bool want_csv = format == EmitFormat::kCsv || format == EmitFormat::kBoth;
  const bool want_json = format == EmitFormat::kJson || format == EmitFormat::kBoth;

  if (want_csv) {
    std::string combined = std::string(kMetricsCsvHeader) + "\n";
    for (const MetricsRecord& r : records) detail::append_csv_row(combined, r);
    const auto combined_path = out_dir / "records.csv";
    detail::write_file(combined_path, combined);
    written.push_back(combined_path);

    // Per-run files, grouped in first-appearance order.
    std::vector<std::pair<std::string, std::string>> runs;  // (file name, content)
    std::map<std::string, std::size_t> run_index;
    for (const MetricsRecord& r : records) {
      const std::string file_name =
          r.scenario + "_" + r.variant + "_" + std::to_string(r.seed) + ".csv";
      auto [it, inserted] = run_index.try_emplace(file_name, runs.size());
      if (inserted) runs.emplace_back(file_name, std::string(kMetricsCsvHeader) + "\n");
      detail::append_csv_row(runs[it->second].second, r);
    }
    for (const auto& [file_name, content] : runs) {
      const auto path = out_dir / file_name;
      detail::write_file(path, content);
      written.push_back(path);
    }
  }

  if (want_json) {
    const auto path = out_dir / "summary.json";
    detail::write_file(path, detail::summary_to_json(summary).dump(2) + "\n");
    written.push_back(path);
  }

  return written;
}

}  // namespace mgrao
