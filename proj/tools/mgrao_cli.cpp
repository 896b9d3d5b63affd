// Command-line front end: run scenario comparisons, sweep group sizes,
// self-verify the math against the plain transcription, or dump learner
// state. Exit codes: 0 success, 1 usage or validation errors, 2 output I/O
// failures.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mgrao/environment.hpp"
#include "mgrao/rng.hpp"
#include "mgrao/scenarios.hpp"
#include "mgrao/stats.hpp"
#include "mgrao/verification.hpp"

namespace {

// Seed specs: a single value "7", an inclusive range "0:19", or a comma
// list "0,3,9".
std::vector<std::uint64_t> parse_seed_spec(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  auto parse_one = [](const std::string& text) {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument("bad seed '" + text + "'");
    return static_cast<std::uint64_t>(v);
  };
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    const std::uint64_t lo = parse_one(spec.substr(0, colon));
    const std::uint64_t hi = parse_one(spec.substr(colon + 1));
    if (hi < lo) throw std::invalid_argument("seed range '" + spec + "' is reversed");
    if (hi - lo >= 100000) throw std::invalid_argument("seed range '" + spec + "' is too wide");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto comma = spec.find(',', start);
    const std::string part =
        spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (part.empty()) throw std::invalid_argument("empty seed in '" + spec + "'");
    seeds.push_back(parse_one(part));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (seeds.empty()) throw std::invalid_argument("no seeds in '" + spec + "'");
  return seeds;
}

int parse_int_value(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  const int v = std::stoi(text, &used);
  if (used != text.size()) throw std::invalid_argument(what + ": bad value '" + text + "'");
  return v;
}

double parse_double_value(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  const double v = std::stod(text, &used);
  if (used != text.size()) throw std::invalid_argument(what + ": bad value '" + text + "'");
  return v;
}

std::uint64_t parse_u64_value(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  const unsigned long long v = std::stoull(text, &used);
  if (used != text.size()) throw std::invalid_argument(what + ": bad value '" + text + "'");
  return static_cast<std::uint64_t>(v);
}

// Flat key=value config files, parsed by hand so the documented format stays
// this simple: one entry per line, '#' comments, keys named after the world
// and learner options (dashes and underscores both accepted). Duplicate and
// unknown keys are errors; explicit flags win over file entries.
std::map<std::string, std::string> read_flat_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
  std::map<std::string, std::string> entries;
  std::string line;
  int line_no = 0;
  auto trim = [](std::string text) {
    const auto from = text.find_first_not_of(" \t\r");
    const auto to = text.find_last_not_of(" \t\r");
    return from == std::string::npos ? std::string() : text.substr(from, to - from + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string entry = trim(line);
    if (entry.empty() || entry.front() == '#') continue;
    const auto eq = entry.find('=');
    const std::string where = path + ":" + std::to_string(line_no);
    if (eq == std::string::npos)
      throw std::invalid_argument(where + ": expected key=value, got '" + entry + "'");
    std::string key = trim(entry.substr(0, eq));
    const std::string value = trim(entry.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument(where + ": empty key");
    std::replace(key.begin(), key.end(), '-', '_');
    if (!entries.emplace(key, value).second)
      throw std::invalid_argument(where + ": duplicate key '" + key + "'");
  }
  return entries;
}

std::vector<std::string> split_commas(const std::string& spec) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto comma = spec.find(',', start);
    const std::string part =
        spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!part.empty()) parts.push_back(part);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (parts.empty()) throw std::invalid_argument("empty list '" + spec + "'");
  return parts;
}

// Option holders shared by run/sweep/dump-state. Values here are the
// single-scenario defaults; scenario presets fill anything the user leaves
// untouched, and explicit flags or config entries win over presets.
struct Options {
  std::string scenario = "single";
  int parents = 10;
  int children = 1;
  int task_types = 20;
  int composite_types = 10;
  int composite_size = 5;
  int resources = 1;
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon = 0.0;
  double churn = 0.0;
  int episodes = 100;
  std::uint64_t seed = 0;
  std::string seeds_spec;
  std::string config_path;
  std::string variants = "fixed-uniform,mgrao-max";
  std::string group_sizes = "1,2,5,10,25,50";
  std::string out_dir = "out";
  std::string format = "both";
  int jobs = 1;
  bool verbose = false;
};

void add_world_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config_path,
                  "flat key=value file naming these world and learner options; "
                  "explicit flags win over file entries");
  cmd->add_option("--scenario", opt.scenario,
                  "evaluation system preset: single, multi, volatile or large")
      ->capture_default_str();
  cmd->add_option("--parents", opt.parents, "parent agents issuing composite tasks")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--children", opt.children, "child agents executing atomic tasks")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--task-types", opt.task_types, "atomic task types")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--composite-types", opt.composite_types, "composite task types")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--composite-size", opt.composite_size, "atomic types per composite")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--resources", opt.resources, "resources per child")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--alpha", opt.alpha, "learning rate")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--gamma", opt.gamma, "eligibility trace decay, below 1")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--epsilon", opt.epsilon, "child-selection exploration probability")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--churn-probability", opt.churn, "per-episode parent churn probability")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--episodes", opt.episodes, "episodes per run")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seed", opt.seed,
                  "root seed for a single run (falls back to MGRAO_SEED when "
                  "neither flags nor a config file set a seed)")
      ->capture_default_str();
  cmd->add_option("--seeds", opt.seeds_spec,
                  "seed list: one value, a:b inclusive, or comma-separated "
                  "(0:19 reproduces the reported comparisons); wins over --seed");
}

// Precedence per knob: explicit flag, then config file entry, then (for the
// seed only) MGRAO_SEED, then the scenario preset.
mgrao::ScenarioConfig build_config(const CLI::App* cmd, const Options& opt) {
  auto given = [cmd](const std::string& name) { return cmd->count(name) > 0; };
  std::map<std::string, std::string> file;
  if (given("--config")) file = read_flat_config(opt.config_path);
  auto file_entry = [&file](const std::string& key) -> const std::string* {
    const auto it = file.find(key);
    return it == file.end() ? nullptr : &it->second;
  };

  static const std::vector<std::string> known{
      "scenario", "parents", "children", "task_types", "composite_types", "composite_size",
      "resources", "alpha", "gamma", "epsilon", "churn_probability", "episodes", "seed", "seeds"};
  for (const auto& [key, value] : file) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("config: unknown key '" + key + "'");
  }

  const std::string* file_scenario = file_entry("scenario");
  mgrao::ScenarioConfig cfg = mgrao::ScenarioConfig::by_name(
      given("--scenario") ? opt.scenario : file_scenario ? *file_scenario : opt.scenario);

  auto resolve_int = [&](const char* flag, const char* key, int flag_value, int& slot) {
    if (given(flag)) slot = flag_value;
    else if (const std::string* v = file_entry(key)) slot = parse_int_value(*v, key);
  };
  auto resolve_double = [&](const char* flag, const char* key, double flag_value, double& slot) {
    if (given(flag)) slot = flag_value;
    else if (const std::string* v = file_entry(key)) slot = parse_double_value(*v, key);
  };
  resolve_int("--parents", "parents", opt.parents, cfg.parents);
  resolve_int("--children", "children", opt.children, cfg.children);
  resolve_int("--task-types", "task_types", opt.task_types, cfg.task_types);
  resolve_int("--composite-types", "composite_types", opt.composite_types, cfg.composite_types);
  resolve_int("--composite-size", "composite_size", opt.composite_size, cfg.composite_size);
  resolve_int("--resources", "resources", opt.resources, cfg.resources);
  resolve_double("--alpha", "alpha", opt.alpha, cfg.alpha);
  resolve_double("--gamma", "gamma", opt.gamma, cfg.gamma);
  resolve_double("--epsilon", "epsilon", opt.epsilon, cfg.epsilon);
  resolve_double("--churn-probability", "churn_probability", opt.churn, cfg.churn_probability);
  resolve_int("--episodes", "episodes", opt.episodes, cfg.episodes);

  if (given("--seeds")) {
    cfg.seeds = parse_seed_spec(opt.seeds_spec);
  } else if (given("--seed")) {
    cfg.seeds = {opt.seed};
  } else if (const std::string* spec = file_entry("seeds")) {
    cfg.seeds = parse_seed_spec(*spec);
  } else if (const std::string* one = file_entry("seed")) {
    cfg.seeds = {parse_u64_value(*one, "seed")};
  } else if (const char* env = std::getenv("MGRAO_SEED")) {
    cfg.seeds = {parse_u64_value(env, "MGRAO_SEED")};
  } else {
    cfg.seeds = {0};  // one deterministic run by default
  }

  cfg.validate();
  return cfg;
}

void print_summary_table(const mgrao::ComparisonSummary& summary, std::size_t seed_count) {
  std::printf("scenario %s: %d episodes, %zu seed(s)\n", summary.scenario.c_str(),
              summary.episodes, seed_count);
  std::printf("%-16s %6s %16s %12s %14s %12s %12s\n", "variant", "runs", "mean_cumulative",
              "stddev", "%_vs_uniform", "%_vs_max", "%_of_max");
  auto pct = [](const std::optional<double>& v) {
    if (!v) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%+.2f", *v);
    return std::string(buf);
  };
  for (const auto& vs : summary.variants) {
    std::printf("%-16s %6d %16.6f %12.6f %14s %12s %12s\n", vs.variant.c_str(), vs.runs,
                vs.mean_cumulative, vs.stddev_cumulative, pct(vs.pct_vs_uniform).c_str(),
                pct(vs.pct_vs_max).c_str(),
                vs.pct_of_max ? pct(vs.pct_of_max).c_str() : "-");
  }
}

void print_paired_tests(const std::vector<mgrao::MetricsRecord>& records,
                        const mgrao::ComparisonSummary& summary) {
  const std::string uniform = "fixed-uniform";
  bool has_uniform = false;
  for (const auto& vs : summary.variants) has_uniform |= vs.variant == uniform;
  if (!has_uniform) return;
  const auto base = mgrao::final_cumulative(records, uniform);
  if (base.size() < 2) return;
  for (const auto& vs : summary.variants) {
    if (vs.variant == uniform) continue;
    const auto arm = mgrao::final_cumulative(records, vs.variant);
    const double p = mgrao::paired_one_sided_p(arm, base);
    std::printf("paired one-sided p (%s > %s): %.6g\n", vs.variant.c_str(), uniform.c_str(), p);
  }
}

int run_comparison_command(const CLI::App* cmd, const Options& opt,
                           const std::vector<mgrao::AlgorithmVariant>& variants) {
  const mgrao::ScenarioConfig cfg = build_config(cmd, opt);
  mgrao::RunDiagnostics diagnostics;
  const auto records = mgrao::run_comparison(cfg, variants, opt.jobs, &diagnostics);
  const auto summary = mgrao::compare(records);
  const auto written =
      mgrao::emit(records, summary, mgrao::parse_emit_format(opt.format), opt.out_dir);
  print_summary_table(summary, cfg.seeds.size());
  if (cfg.seeds.size() >= 2) print_paired_tests(records, summary);
  if (opt.verbose) {
    for (const auto& path : written) std::printf("wrote %s\n", path.string().c_str());
    std::printf("max value-conservation drift: %.3g\n", diagnostics.max_conservation_error);
  }
  if (diagnostics.max_conservation_error > 1e-9) {
    std::fprintf(stderr, "warning: value conservation drifted by %.3g\n",
                 diagnostics.max_conservation_error);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mg-rao: multi-group resource allocation optimisation simulator"};
  app.require_subcommand(1);

  Options run_opt;
  CLI::App* run_cmd = app.add_subcommand("run", "run one scenario comparison and emit metrics");
  add_world_options(run_cmd, run_opt);
  run_cmd->add_option("--variants", run_opt.variants,
                      "comma list of fixed-uniform, mgrao-max, mgrao-<g>:1")
      ->capture_default_str();
  run_cmd->add_option("--out-dir", run_opt.out_dir, "directory for emitted files")
      ->capture_default_str();
  run_cmd->add_option("--format", run_opt.format, "emit csv, json or both")
      ->capture_default_str();
  run_cmd->add_option("--jobs", run_opt.jobs, "worker threads across variants")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  run_cmd->add_flag("-v,--verbose", run_opt.verbose, "list written files and diagnostics");

  Options sweep_opt;
  sweep_opt.scenario = "large";
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "compare group sizes on one scenario and emit metrics");
  add_world_options(sweep_cmd, sweep_opt);
  sweep_cmd->add_option("--group-sizes", sweep_opt.group_sizes,
                        "comma list of parents-per-group values to sweep")
      ->capture_default_str();
  sweep_cmd->add_option("--out-dir", sweep_opt.out_dir, "directory for emitted files")
      ->capture_default_str();
  sweep_cmd->add_option("--format", sweep_opt.format, "emit csv, json or both")
      ->capture_default_str();
  sweep_cmd->add_option("--jobs", sweep_opt.jobs, "worker threads across variants")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  sweep_cmd->add_flag("-v,--verbose", sweep_opt.verbose, "list written files and diagnostics");

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "check the implementation against its plain transcription");

  Options dump_opt;
  CLI::App* dump_cmd =
      app.add_subcommand("dump-state", "print one child's learner state after a run");
  add_world_options(dump_cmd, dump_opt);
  std::string dump_variant = "mgrao-max";
  int dump_child = 0;
  int dump_episodes = 0;
  std::string dump_out;
  dump_cmd->add_option("--variant", dump_variant, "learner variant to run")
      ->capture_default_str();
  dump_cmd->add_option("--child", dump_child, "child agent to dump")->capture_default_str();
  dump_cmd->add_option("--run-episodes", dump_episodes, "episodes to run before dumping")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  dump_cmd->add_option("--out", dump_out, "write the dump to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run_cmd->parsed()) {
      const mgrao::ScenarioConfig cfg = build_config(run_cmd, run_opt);
      std::vector<mgrao::AlgorithmVariant> variants;
      for (const std::string& label : split_commas(run_opt.variants))
        variants.push_back(mgrao::AlgorithmVariant::parse(label, cfg.parents));
      return run_comparison_command(run_cmd, run_opt, variants);
    }

    if (sweep_cmd->parsed()) {
      const mgrao::ScenarioConfig cfg = build_config(sweep_cmd, sweep_opt);
      std::vector<int> group_counts;
      for (const std::string& part : split_commas(sweep_opt.group_sizes)) {
        std::size_t used = 0;
        const int size = std::stoi(part, &used);
        if (used != part.size() || size < 1 || size > cfg.parents)
          throw std::invalid_argument("group size '" + part + "' outside [1, parents]");
        group_counts.push_back(mgrao::ParentGroupMap::group_count_for_size(cfg.parents, size));
      }
      std::sort(group_counts.begin(), group_counts.end());
      group_counts.erase(std::unique(group_counts.begin(), group_counts.end()),
                         group_counts.end());
      std::vector<mgrao::AlgorithmVariant> variants{mgrao::AlgorithmVariant::fixed_uniform()};
      for (int groups : group_counts)
        variants.push_back(mgrao::AlgorithmVariant::mgrao(groups));
      return run_comparison_command(sweep_cmd, sweep_opt, variants);
    }

    if (verify_cmd->parsed()) {
      const auto results = mgrao::run_verification();
      int failures = 0;
      for (const auto& r : results) {
        if (r.pass) {
          std::printf("ok   %s\n", r.name.c_str());
        } else {
          ++failures;
          std::printf("FAIL %s: %s\n", r.name.c_str(), r.detail.c_str());
        }
      }
      std::printf("%zu checks, %d failure(s)\n", results.size(), failures);
      return failures == 0 ? 0 : 1;
    }

    if (dump_cmd->parsed()) {
      mgrao::ScenarioConfig cfg = build_config(dump_cmd, dump_opt);
      const auto variant = mgrao::AlgorithmVariant::parse(dump_variant, cfg.parents);
      if (!variant.use_learner)
        throw std::invalid_argument("fixed-uniform has no learner state to dump");
      const std::uint64_t seed = cfg.seeds.front();
      std::mt19937_64 world_rng = mgrao::make_rng(seed, mgrao::RngStream::kWorld);
      mgrao::World world = mgrao::build_world(cfg.world_params(), world_rng);
      mgrao::SimulationConfig sim_cfg;
      sim_cfg.use_learner = true;
      sim_cfg.learner_groups = variant.groups;
      sim_cfg.alpha = cfg.alpha;
      sim_cfg.gamma = cfg.gamma;
      sim_cfg.epsilon = cfg.epsilon;
      sim_cfg.churn_probability = cfg.churn_probability;
      sim_cfg.seed = seed;
      mgrao::Simulation sim(std::move(world), sim_cfg);
      for (int e = 0; e < dump_episodes; ++e) sim.run_episode();
      const auto& child = sim.child(dump_child);
      const std::string dump = child.learner->dump_state();
      if (dump_out.empty()) {
        std::fputs(dump.c_str(), stdout);
      } else {
        std::ofstream out(dump_out, std::ios::binary | std::ios::trunc);
        if (!out) throw mgrao::IoError("cannot open " + dump_out + " for writing");
        out << dump;
      }
      return 0;
    }
  } catch (const mgrao::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  return 0;
}
