#pragma once

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mgrao/environment.hpp"
#include "mgrao/learner.hpp"
#include "mgrao/reference.hpp"

namespace mgrao {

// Self-check suite behind the `verify` subcommand. Every check pins an
// expected value that was worked out independently of the production code
// (by hand or from the plain transcription in reference.hpp) and fails loudly
// on drift. Deterministic checks use a tolerance of 1e-12; checks that
// exercise seeded sampling state their own looser tolerance inline.

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // empty on pass
};

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline std::pair<bool, std::string> expect_close(double actual, double expected, double tol) {
  if (close(actual, expected, tol)) return {true, ""};
  return {false, "expected " + fmt(expected) + " got " + fmt(actual)};
}

inline std::pair<bool, std::string> expect_vector(const std::vector<double>& actual,
                                                  const std::vector<double>& expected,
                                                  double tol) {
  if (actual.size() != expected.size())
    return {false, "size mismatch: expected " + std::to_string(expected.size()) + " got " +
                       std::to_string(actual.size())};
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (!close(actual[i], expected[i], tol))
      return {false, "index " + std::to_string(i) + ": expected " + fmt(expected[i]) +
                         " got " + fmt(actual[i])};
  }
  return {true, ""};
}

}  // namespace detail

inline std::vector<CheckResult> run_verification() {
  using detail::expect_close;
  using detail::expect_vector;
  using detail::fmt;

  std::vector<CheckResult> results;
  auto run = [&results](const std::string& name, auto&& body) {
    try {
      auto [pass, detail_msg] = body();
      results.push_back({name, pass, pass ? "" : detail_msg});
    } catch (const std::exception& e) {
      results.push_back({name, false, std::string("exception: ") + e.what()});
    }
  };

  constexpr double kTol = 1e-12;

  // Hand-checked constants, frozen. All are plain IEEE doubles.
  constexpr double kSoftmaxHi = 0.7310585786300049;   // e / (e + 1)
  constexpr double kSoftmaxLo = 0.2689414213699951;   // 1 / (e + 1)
  constexpr double kLn2 = 0.6931471805599453;
  constexpr double kDivergenceSkewed = 0.13081203594113697;  // for [0.75, 0.25]
  constexpr double kCombinedHi = 0.6224593312018546;  // softmax([0.75, 0.25])[0]
  constexpr double kCombinedLo = 0.3775406687981454;

  run("sum-normalize ratio", [&] {
    const std::vector<double> in{3.0, 1.0};
    auto main_out = sum_normalize(in);
    auto ref_out = reference::sum_normalize(in);
    auto [p1, d1] = expect_vector(main_out, {0.75, 0.25}, kTol);
    if (!p1) return std::pair{false, d1};
    return expect_vector(main_out, ref_out, kTol);
  });

  run("sum-normalize zero vector", [&] {
    const std::vector<double> in{0.0, 0.0, 0.0};
    auto main_out = sum_normalize(in);
    auto ref_out = reference::sum_normalize(in);
    auto [p1, d1] = expect_vector(main_out, {0.0, 0.0, 0.0}, 0.0);
    if (!p1) return std::pair{false, d1};
    return expect_vector(main_out, ref_out, 0.0);
  });

  run("softmax pair", [&] {
    const std::vector<double> in{1.0, 0.0};
    auto main_out = softmax(in);
    auto ref_out = reference::softmax(in);
    auto [p1, d1] = expect_vector(main_out, {kSoftmaxHi, kSoftmaxLo}, kTol);
    if (!p1) return std::pair{false, d1};
    return expect_vector(main_out, ref_out, kTol);
  });

  run("divergence one-hot", [&] {
    const std::vector<double> in{1.0, 0.0};
    auto [p1, d1] = expect_close(group_entropy(in), kLn2, kTol);
    if (!p1) return std::pair{false, d1};
    return expect_close(group_entropy(in), reference::divergence_from_uniform(in), kTol);
  });

  run("divergence skewed", [&] {
    const std::vector<double> in{0.75, 0.25};
    auto [p1, d1] = expect_close(group_entropy(in), kDivergenceSkewed, kTol);
    if (!p1) return std::pair{false, d1};
    return expect_close(group_entropy(in), reference::divergence_from_uniform(in), kTol);
  });

  run("divergence uniform is zero", [&] {
    const std::vector<double> in{0.25, 0.25, 0.25, 0.25};
    return expect_close(group_entropy(in), 0.0, kTol);
  });

  run("blending counts-only", [&] {
    // Uniform rows carry no divergence signal; counts 3:1 split alone.
    Matrix w(2, 2, 0.5);
    const std::vector<long long> counts{3, 1};
    auto main_out = blending_vector(counts, w);
    auto ref_out = reference::blending(counts, {{0.5, 0.5}, {0.5, 0.5}});
    auto [p1, d1] = expect_vector(main_out, {0.75, 0.25}, kTol);
    if (!p1) return std::pair{false, d1};
    return expect_vector(main_out, ref_out, kTol);
  });

  run("blending divergence-only", [&] {
    // No samples yet; only the first row diverges from uniform.
    Matrix w(2, 2, 0.5);
    w(0, 0) = 1.0;
    w(0, 1) = 0.0;
    const std::vector<long long> counts{0, 0};
    auto main_out = blending_vector(counts, w);
    auto ref_out = reference::blending(counts, {{1.0, 0.0}, {0.5, 0.5}});
    auto [p1, d1] = expect_vector(main_out, {1.0, 0.0}, kTol);
    if (!p1) return std::pair{false, d1};
    return expect_vector(main_out, ref_out, kTol);
  });

  run("blending both signals", [&] {
    // Identical rows and equal counts: each group gets 0.5 + 0.5 = 1.
    Matrix w(2, 2);
    w(0, 0) = 1.0;
    w(0, 1) = 0.0;
    w(1, 0) = 1.0;
    w(1, 1) = 0.0;
    const std::vector<long long> counts{1, 1};
    auto main_out = blending_vector(counts, w);
    auto ref_out = reference::blending(counts, {{1.0, 0.0}, {1.0, 0.0}});
    auto [p1, d1] = expect_vector(main_out, {1.0, 1.0}, kTol);
    if (!p1) return std::pair{false, d1};
    return expect_vector(main_out, ref_out, kTol);
  });

  run("combined single group", [&] {
    Matrix w(1, 2);
    w(0, 0) = 1.0;
    w(0, 1) = 0.0;
    const std::vector<double> blend{1.0};
    auto main_out = combined_weights(blend, w);
    auto ref_out = reference::combined(blend, {{1.0, 0.0}});
    auto [p1, d1] = expect_vector(main_out, {kSoftmaxHi, kSoftmaxLo}, kTol);
    if (!p1) return std::pair{false, d1};
    return expect_vector(main_out, ref_out, kTol);
  });

  run("combined two groups", [&] {
    // Identity rows mixed 0.75 : 0.25 then softmaxed.
    Matrix w(2, 2, 0.0);
    w(0, 0) = 1.0;
    w(1, 1) = 1.0;
    const std::vector<double> blend{0.75, 0.25};
    auto main_out = combined_weights(blend, w);
    auto ref_out = reference::combined(blend, {{1.0, 0.0}, {0.0, 1.0}});
    auto [p1, d1] = expect_vector(main_out, {kCombinedHi, kCombinedLo}, kTol);
    if (!p1) return std::pair{false, d1};
    return expect_vector(main_out, ref_out, kTol);
  });

  run("trace first touch", [&] {
    Matrix e(2, 3, 0.0);
    eligibility_update(e, 0, 1, 0.9);
    reference::RowMatrix re(2, std::vector<double>(3, 0.0));
    reference::trace_update(re, 0, 1, 0.9);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double want = (i == 0 && j == 1) ? 1.0 : 0.0;
        if (e(i, j) != want || re[i][j] != want)
          return std::pair{false, std::string("cell (") + std::to_string(i) + "," +
                                      std::to_string(j) + ") expected " + fmt(want)};
      }
    }
    return std::pair{true, std::string()};
  });

  run("trace decay", [&] {
    Matrix e(2, 2, 0.0);
    e(1, 1) = 0.5;
    eligibility_update(e, 0, 0, 0.8);
    reference::RowMatrix re{{0.0, 0.0}, {0.0, 0.5}};
    reference::trace_update(re, 0, 0, 0.8);
    const std::vector<double> got{e(0, 0), e(0, 1), e(1, 0), e(1, 1)};
    const std::vector<double> ref{re[0][0], re[0][1], re[1][0], re[1][1]};
    auto [p1, d1] = expect_vector(got, {1.0, 0.0, 0.0, 0.4}, kTol);
    if (!p1) return std::pair{false, d1};
    return expect_vector(got, ref, kTol);
  });

  run("trace repeated decay", [&] {
    // A cell left untouched for k refreshes holds gamma^k exactly.
    const double gamma = 0.9;
    Matrix e(2, 2, 0.0);
    eligibility_update(e, 0, 0, gamma);
    for (int k = 0; k < 5; ++k) eligibility_update(e, 1, 1, gamma);
    return expect_close(e(0, 0), std::pow(gamma, 5), kTol);
  });

  run("update single step", [&] {
    // One positive value on a fresh single-group learner over two types:
    // weights move from [0.5, 0.5] to [6/11, 5/11].
    LearnerConfig lc;
    lc.alpha = 0.2;
    lc.gamma = 0.8;
    lc.groups = 1;
    lc.task_types = 2;
    MgraoLearner learner(lc, ParentGroupMap::round_robin(1, 1));
    learner.update(0, 0, 0.5);
    reference::RowMatrix rw{{0.5, 0.5}};
    reference::RowMatrix re{{0.0, 0.0}};
    reference::update_step(rw, re, 0, 0, 0.5, 0.2, 0.8);
    const std::vector<double> got{learner.weights(0)(0, 0), learner.weights(0)(0, 1)};
    auto [p1, d1] =
        expect_vector(got, {0.5454545454545454, 0.45454545454545453}, kTol);
    if (!p1) return std::pair{false, d1};
    return expect_vector(got, {rw[0][0], rw[0][1]}, kTol);
  });

  run("update zero value", [&] {
    // A zero-value observation leaves weights in place but still refreshes
    // the trace cell.
    LearnerConfig lc;
    lc.groups = 1;
    lc.task_types = 3;
    MgraoLearner learner(lc, ParentGroupMap::round_robin(2, 1));
    learner.update(0, 1, 0.0);
    const std::vector<double> got{learner.weights(0)(0, 0), learner.weights(0)(0, 1),
                                  learner.weights(0)(0, 2)};
    const double third = 1.0 / 3.0;
    auto [p1, d1] = expect_vector(got, {third, third, third}, kTol);
    if (!p1) return std::pair{false, d1};
    return expect_close(learner.traces(0)(0, 1), 1.0, 0.0);
  });

  run("update saturation", [&] {
    // Repeated full-value observations of one type drive its weight towards
    // 1, monotonically.
    LearnerConfig lc;
    lc.groups = 1;
    lc.task_types = 2;
    MgraoLearner learner(lc, ParentGroupMap::round_robin(1, 1));
    double prev = learner.weights(0)(0, 0);
    for (int k = 0; k < 200; ++k) {
      learner.update(0, 0, 1.0);
      const double cur = learner.weights(0)(0, 0);
      if (cur + 1e-15 < prev)
        return std::pair{false, "weight decreased at step " + std::to_string(k)};
      prev = cur;
    }
    if (prev < 0.999) return std::pair{false, "final weight only " + fmt(prev)};
    return std::pair{true, std::string()};
  });

  run("weighting single group", [&] {
    // One fully committed group row: combined weight equals the softmax of
    // that row, independent of counts.
    LearnerConfig lc;
    lc.groups = 1;
    lc.task_types = 2;
    MgraoLearner learner(lc, ParentGroupMap::round_robin(1, 1));
    // Drive the row to (numerically) [1, 0] via the reference path instead:
    // construct the expected combined weight for the actual row.
    learner.record_sample(0);
    for (int k = 0; k < 400; ++k) learner.update(0, 0, 1.0);
    reference::RowMatrix rw{{learner.weights(0)(0, 0), learner.weights(0)(0, 1)}};
    const double expected = reference::weighting(rw, {1}, 0);
    return expect_close(learner.weight_for(0, 0, 0), expected, kTol);
  });

  run("weighting uniform start", [&] {
    // Fresh learner, no samples: every one of the 20 types gets weight 1/20,
    // so a possessed amount of 0.8 splits into 0.04 per type.
    LearnerConfig lc;
    lc.groups = 2;
    lc.task_types = 20;
    MgraoLearner learner(lc, ParentGroupMap::round_robin(4, 2));
    for (int t = 0; t < 20; ++t) {
      auto [p, d] = expect_close(learner.weight_for(0, t, 0), 0.05, kTol);
      if (!p) return std::pair{false, "type " + std::to_string(t) + ": " + d};
    }
    return expect_close(learner.allocation_for(1, 3, 0, 0.8), 0.04, kTol);
  });

  run("allocation splits possessed amount", [&] {
    // Combined weights are a distribution, so committed amounts across all
    // types always sum back to the possessed amount.
    LearnerConfig lc;
    lc.groups = 3;
    lc.task_types = 7;
    MgraoLearner learner(lc, ParentGroupMap::round_robin(5, 3));
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int k = 0; k < 60; ++k) {
      const int parent = static_cast<int>(rng() % 5);
      const int type = static_cast<int>(rng() % 7);
      learner.record_sample(parent);
      learner.update(parent, type, u01(rng));
    }
    const double possessed = 0.37;
    double total = 0.0;
    for (int t = 0; t < 7; ++t) total += learner.allocation_for(0, t, 0, possessed);
    return expect_close(total, possessed, 1e-9);
  });

  run("learner matches transcription", [&] {
    // Production learner against the plain transcription on small random
    // histories: weights, traces and combined weighting must agree to 1e-12.
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      for (int groups = 1; groups <= 2; ++groups) {
        for (int types = 2; types <= 3; ++types) {
          const int parents = groups + 1;
          LearnerConfig lc;
          lc.alpha = 0.1;
          lc.gamma = 0.9;
          lc.groups = groups;
          lc.task_types = types;
          MgraoLearner learner(lc, ParentGroupMap::round_robin(parents, groups));
          reference::RowMatrix rw(groups,
                                  std::vector<double>(types, 1.0 / static_cast<double>(types)));
          reference::RowMatrix re(groups, std::vector<double>(types, 0.0));
          std::vector<long long> rcounts(groups, 0);
          std::mt19937_64 rng(seed * 7919);
          std::uniform_real_distribution<double> u01(0.0, 1.0);
          for (int step = 0; step < 10; ++step) {
            const int parent = static_cast<int>(rng() % parents);
            const int type = static_cast<int>(rng() % types);
            const double value = u01(rng);
            learner.record_sample(parent);
            ++rcounts[parent % groups];
            learner.update(parent, type, value);
            reference::update_step(rw, re, parent % groups, type, value, lc.alpha, lc.gamma);
          }
          for (int i = 0; i < groups; ++i) {
            for (int j = 0; j < types; ++j) {
              if (!detail::close(learner.weights(0)(i, j), rw[i][j], 1e-12))
                return std::pair{false, "weights diverge at seed " + std::to_string(seed)};
              if (!detail::close(learner.traces(0)(i, j), re[i][j], 1e-12))
                return std::pair{false, "traces diverge at seed " + std::to_string(seed)};
            }
          }
          for (int t = 0; t < types; ++t) {
            const double got = learner.weight_for(0, t, 0);
            const double want = reference::weighting(rw, rcounts, t);
            if (!detail::close(got, want, 1e-12))
              return std::pair{false, "weighting diverges at seed " + std::to_string(seed) +
                                          " type " + std::to_string(t)};
          }
        }
      }
    }
    return std::pair{true, std::string()};
  });

  run("quality ratio and saturation", [&] {
    QualityModel quality{{0.5, 0.2}};
    auto [p1, d1] = expect_close(quality.quality(0, 0.25), 0.5, kTol);
    if (!p1) return std::pair{false, d1};
    return expect_close(quality.quality(1, 0.7), 1.0, 0.0);
  });

  run("valuation shares", [&] {
    // Preferences 0.4 : 0.2 over a two-atomic composite -> shares 2/3 : 1/3.
    CompositeTask task;
    task.atomics = {AtomicTask{0, 0, ""}, AtomicTask{1, 1, ""}};
    const auto shares = compute_ctv(task, {0.4, 0.2});
    return expect_vector(shares, {2.0 / 3.0, 1.0 / 3.0}, kTol);
  });

  run("valuation aggregate and split", [&] {
    // ctv [0.5, 0.5] with qualities [1, 0.5]: aggregate 0.75, per-task
    // values 0.375 each, summing back to the aggregate.
    const std::vector<double> ctv{0.5, 0.5};
    const std::vector<double> quality{1.0, 0.5};
    const double taq = compute_taq(ctv, quality);
    auto [p1, d1] = expect_close(taq, 0.75, kTol);
    if (!p1) return std::pair{false, d1};
    auto [p2, d2] = expect_close(compute_atv(taq, ctv[0]), 0.375, kTol);
    if (!p2) return std::pair{false, d2};
    const double split = compute_atv(taq, ctv[0]) + compute_atv(taq, ctv[1]);
    return expect_close(split, taq, kTol);
  });

  run("selection greedy", [&] {
    ParentAgent parent;
    parent.id = 0;
    parent.value_mean = {{0.2}, {0.9}};  // child 1 clearly better for type 0
    parent.value_count = {{1}, {1}};
    CompositeTask task;
    task.atomics = {AtomicTask{0, 0, ""}, AtomicTask{1, 0, ""}};
    std::mt19937_64 rng(1);
    const auto allocation = allocate_composite(parent, task, 2, ChildSelectionPolicy{0.0}, rng);
    for (ChildId c : allocation.child_of_atomic) {
      if (c != 1) return std::pair{false, std::string("greedy pick was not the best child")};
    }
    return std::pair{true, std::string()};
  });

  run("selection exploratory frequency", [&] {
    // Always-explore policy with estimates 1 vs 0 follows the Boltzmann
    // ratio e : 1, so the better child is picked e/(e+1) of the time.
    // Seeded draw; tolerance 0.02 on 10000 picks.
    ParentAgent parent;
    parent.id = 0;
    parent.value_mean = {{1.0}, {0.0}};
    parent.value_count = {{1}, {1}};
    CompositeTask task;
    for (int k = 0; k < 10000; ++k)
      task.atomics.push_back(AtomicTask{k, 0, ""});
    std::mt19937_64 rng(42);
    const auto allocation = allocate_composite(parent, task, 2, ChildSelectionPolicy{1.0}, rng);
    long picks = 0;
    for (ChildId c : allocation.child_of_atomic) picks += (c == 0) ? 1 : 0;
    const double freq = static_cast<double>(picks) / 10000.0;
    return expect_close(freq, kSoftmaxHi, 0.02);
  });

  run("churn rate", [&] {
    // 10 parents at churn probability 0.25: 2.5 expected flips per episode.
    // Seeded; tolerance 0.1 on the mean over 10000 episodes.
    std::vector<ParentAgent> parents(10);
    std::mt19937_64 rng(7);
    long long flips = 0;
    for (int k = 0; k < 10000; ++k) flips += churn_step(parents, VolatilityModel{0.25}, rng);
    const double mean = static_cast<double>(flips) / 10000.0;
    return expect_close(mean, 2.5, 0.1);
  });

  run("churn off", [&] {
    std::vector<ParentAgent> parents(5);
    std::mt19937_64 rng(3);
    const int flips = churn_step(parents, VolatilityModel{0.0}, rng);
    if (flips != 0) return std::pair{false, std::string("flips happened with churn off")};
    for (const ParentAgent& p : parents) {
      if (!p.active) return std::pair{false, std::string("activity changed with churn off")};
    }
    return std::pair{true, std::string()};
  });

  run("value conservation short run", [&] {
    // Ten episodes of a small two-child system: per-task values must sum
    // back to each composite's aggregate quality, every feedback must have a
    // matching execution, and planned amounts must cover each child's
    // possessed amount.
    std::mt19937_64 world_rng = make_rng(11, RngStream::kWorld);
    WorldParams params;
    params.children = 2;
    World world = build_world(params, world_rng);
    SimulationConfig cfg;
    cfg.use_learner = true;
    cfg.learner_groups = 10;
    cfg.epsilon = 0.1;
    cfg.seed = 11;
    Simulation sim(world, cfg);
    for (int e = 0; e < 10; ++e) sim.run_episode();
    if (sim.max_conservation_error() > 1e-9)
      return std::pair{false, "conservation error " + fmt(sim.max_conservation_error())};
    if (sim.atomic_executions() != sim.feedback_events())
      return std::pair{false, std::string("executions and feedback events differ")};
    const auto snap = sim.snapshot();
    for (int c = 0; c < sim.world().descriptor.child_count; ++c) {
      const double possessed = sim.world().descriptor.resource_map.amount(c, 0);
      double total = 0.0;
      for (const auto& per_type : snap.amounts[c]) total += per_type[0];
      if (!detail::close(total, possessed, 1e-9))
        return std::pair{false, "snapshot amounts do not cover child " + std::to_string(c)};
    }
    return std::pair{true, std::string()};
  });

  return results;
}

}  // namespace mgrao
