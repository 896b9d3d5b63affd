#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mgrao/format.hpp"
#include "mgrao/matrix.hpp"

namespace mgrao {

// Tolerance used when checking that a weight row is a probability vector.
inline constexpr double kRowSumTolerance = 1e-9;

// x_i / sum(x). The all-zero vector maps to itself (no distribution to
// recover), negative entries are a contract violation.
inline std::vector<double> sum_normalize(std::span<const double> values) {
  double total = 0.0;
  for (double v : values) {
    if (!(v >= 0.0)) throw std::invalid_argument("sum_normalize: negative or NaN entry");
    total += v;
  }
  std::vector<double> out(values.begin(), values.end());
  if (total > 0.0) {
    for (double& v : out) v /= total;
  }
  return out;
}

// e^{x_i} / sum_j e^{x_j}, computed with the usual max shift so large inputs
// do not overflow. Requires a non-empty, finite input.
inline std::vector<double> softmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("softmax: empty input");
  double hi = values[0];
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("softmax: non-finite entry");
    hi = std::max(hi, v);
  }
  std::vector<double> out(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::exp(values[i] - hi);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

// Divergence of a weight row from the uniform distribution over its task
// types: sum_i p_i * ln(p_i * n). Zero entries contribute zero. The input
// must already be a probability vector; the result lies in [0, ln n].
inline double group_entropy(std::span<const double> row) {
  if (row.empty()) throw std::invalid_argument("group_entropy: empty row");
  double total = 0.0;
  for (double p : row) {
    if (!(p >= 0.0)) throw std::invalid_argument("group_entropy: negative or NaN entry");
    total += p;
  }
  if (std::abs(total - 1.0) > kRowSumTolerance)
    throw std::invalid_argument("group_entropy: row is not a probability vector");
  const double n = static_cast<double>(row.size());
  double acc = 0.0;
  for (double p : row) {
    if (p > 0.0) acc += p * std::log(p * n);
  }
  return std::max(acc, 0.0);  // guard against tiny negative round-off
}

// Per-group blending signal: normalized row divergences plus normalized
// sample counts. Each entry lies in [0, 2]; the vector is all zero only in
// the cold-start state (uniform rows, no samples yet).
inline std::vector<double> blending_vector(std::span<const long long> counts,
                                           const Matrix& weights) {
  if (static_cast<int>(counts.size()) != weights.rows())
    throw std::invalid_argument("blending_vector: counts/weights shape mismatch");
  std::vector<double> divergence(counts.size());
  for (int i = 0; i < weights.rows(); ++i) divergence[i] = group_entropy(weights.row(i));
  std::vector<double> tally(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) throw std::invalid_argument("blending_vector: negative count");
    tally[i] = static_cast<double>(counts[i]);
  }
  std::vector<double> a = sum_normalize(divergence);
  std::vector<double> b = sum_normalize(tally);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

// Collapse the per-group weight rows into one weight per task type: the
// blending vector is normalized (again, deliberately, matching the published
// form), used to mix the rows, and the mixture is pushed through softmax.
inline std::vector<double> combined_weights(std::span<const double> blending,
                                            const Matrix& weights) {
  if (static_cast<int>(blending.size()) != weights.rows())
    throw std::invalid_argument("combined_weights: blending/weights shape mismatch");
  std::vector<double> mix = sum_normalize(blending);
  std::vector<double> mixed(weights.cols(), 0.0);
  for (int i = 0; i < weights.rows(); ++i) {
    const auto row = weights.row(i);
    for (int j = 0; j < weights.cols(); ++j) mixed[j] += mix[i] * row[j];
  }
  return softmax(mixed);
}

// Replacement-style trace update: every positive cell decays by gamma, then
// the touched cell is pinned to 1. All cells stay in [0, 1].
inline void eligibility_update(Matrix& traces, int group, int task_type, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("eligibility_update: gamma outside [0, 1)");
  if (group < 0 || group >= traces.rows() || task_type < 0 || task_type >= traces.cols())
    throw std::out_of_range("eligibility_update: cell outside the trace matrix");
  for (int i = 0; i < traces.rows(); ++i) {
    for (int j = 0; j < traces.cols(); ++j) {
      if (traces(i, j) > 0.0) traces(i, j) *= gamma;
    }
  }
  traces(group, task_type) = 1.0;
}

// Assignment of parent agents to learning groups. Groups are dense ids
// 0..group_count-1 and every group holds at least one parent.
class ParentGroupMap {
 public:
  ParentGroupMap() = default;

  // parent p lands in group p mod m, so group sizes differ by at most one.
  static ParentGroupMap round_robin(int parent_count, int group_count) {
    if (parent_count <= 0) throw std::invalid_argument("round_robin: no parents");
    if (group_count <= 0 || group_count > parent_count)
      throw std::invalid_argument("round_robin: group count outside [1, parents]");
    ParentGroupMap map;
    map.group_count_ = group_count;
    map.group_of_.resize(parent_count);
    for (int p = 0; p < parent_count; ++p) map.group_of_[p] = p % group_count;
    return map;
  }

  // Number of groups induced by a target group size (ceiling division).
  static int group_count_for_size(int parent_count, int group_size) {
    if (parent_count <= 0 || group_size <= 0)
      throw std::invalid_argument("group_count_for_size: non-positive argument");
    return (parent_count + group_size - 1) / group_size;
  }

  int parent_count() const { return static_cast<int>(group_of_.size()); }
  int group_count() const { return group_count_; }

  int group_of(int parent) const {
    if (parent < 0 || parent >= parent_count())
      throw std::out_of_range("ParentGroupMap: unknown parent");
    return group_of_[parent];
  }

 private:
  int group_count_ = 0;
  std::vector<int> group_of_;
};

struct LearnerConfig {
  double alpha = 0.1;  // learning rate, in [0, 1]
  double gamma = 0.9;  // trace decay, in [0, 1)
  int groups = 1;      // parent groups m
  int task_types = 1;  // atomic task types n

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0))
      throw std::invalid_argument("LearnerConfig: alpha outside [0, 1]");
    if (!(gamma >= 0.0 && gamma < 1.0))
      throw std::invalid_argument("LearnerConfig: gamma outside [0, 1)");
    if (groups < 1) throw std::invalid_argument("LearnerConfig: groups < 1");
    if (task_types < 1) throw std::invalid_argument("LearnerConfig: task_types < 1");
  }
};

/**
 * Per-child learning state: one weight matrix and one eligibility-trace
 * matrix per resource (rows are parent groups, columns task types), plus a
 * per-group sample count shared across resources.
 *
 * update() folds one observed task value into every resource's weights;
 * weight_for()/allocation_for() produce the combined per-type weight used to
 * split a possessed resource amount. Weight rows always stay probability
 * vectors; traces always stay inside [0, 1].
 *
 * Instances are not safe for concurrent use: weight queries fill an internal
 * divergence cache that update() invalidates.
 */
class MgraoLearner {
 public:
  MgraoLearner(LearnerConfig config, ParentGroupMap groups, int resource_count = 1)
      : config_(config), groups_(std::move(groups)) {
    config_.validate();
    if (groups_.group_count() != config_.groups)
      throw std::invalid_argument("MgraoLearner: group map does not match config");
    if (resource_count < 1) throw std::invalid_argument("MgraoLearner: no resources");
    const double uniform = 1.0 / static_cast<double>(config_.task_types);
    weights_.assign(resource_count, Matrix(config_.groups, config_.task_types, uniform));
    traces_.assign(resource_count, Matrix(config_.groups, config_.task_types, 0.0));
    counts_.assign(config_.groups, 0);
    divergence_.assign(resource_count, std::vector<double>(config_.groups, 0.0));
    divergence_fresh_.assign(resource_count, true);  // uniform rows diverge by 0
  }

  const LearnerConfig& config() const { return config_; }
  const ParentGroupMap& groups() const { return groups_; }
  int resource_count() const { return static_cast<int>(weights_.size()); }
  const Matrix& weights(int resource) const { return weights_.at(resource); }
  const Matrix& traces(int resource) const { return traces_.at(resource); }
  std::span<const long long> sample_counts() const { return counts_; }

  // (group row, task type column) addressed by one parent's task.
  std::pair<int, int> parent_task_index(int parent, int task_type) const {
    if (task_type < 0 || task_type >= config_.task_types)
      throw std::out_of_range("MgraoLearner: unknown task type");
    return {groups_.group_of(parent), task_type};
  }

  // Bookkeeping for the blending signal: called once per atomic task routed
  // to this child, before the corresponding update. Counts never reset.
  void record_sample(int parent) { ++counts_[groups_.group_of(parent)]; }

  // Fold one observed task value into the weights of every resource:
  // refresh that resource's traces at the task's cell, take the trace-scaled
  // gradient step, then renormalize each row.
  void update(int parent, int task_type, double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("MgraoLearner: non-finite value");
    const auto [group, type] = parent_task_index(parent, task_type);
    const double v = std::max(value, 0.0);  // task values live in [0, 1]
    for (int r = 0; r < resource_count(); ++r) {
      eligibility_update(traces_[r], group, type, config_.gamma);
      Matrix& w = weights_[r];
      const Matrix& e = traces_[r];
      for (int i = 0; i < w.rows(); ++i) {
        double sum = 0.0;
        for (int j = 0; j < w.cols(); ++j) {
          w(i, j) += config_.alpha * v * e(i, j);
          sum += w(i, j);
        }
        if (sum > 0.0) {
          for (int j = 0; j < w.cols(); ++j) w(i, j) /= sum;
        }
      }
      divergence_fresh_[r] = false;
    }
  }

  // Combined weight vector over task types for one resource.
  std::vector<double> combined_weight_vector(int resource) const {
    const Matrix& w = weights_.at(resource);
    refresh_divergence(resource);
    std::vector<double> blend(config_.groups);
    double dsum = 0.0;
    long long csum = 0;
    for (int i = 0; i < config_.groups; ++i) {
      dsum += divergence_[resource][i];
      csum += counts_[i];
    }
    for (int i = 0; i < config_.groups; ++i) {
      double b = dsum > 0.0 ? divergence_[resource][i] / dsum : 0.0;
      if (csum > 0) b += static_cast<double>(counts_[i]) / static_cast<double>(csum);
      blend[i] = b;
    }
    return combined_weights(blend, w);
  }

  // Combined weight for one (task type, resource) pair.
  double weight_for(int parent, int task_type, int resource) const {
    const auto [group, type] = parent_task_index(parent, task_type);
    (void)group;  // the combined weight blends over all groups
    return combined_weight_vector(resource)[static_cast<std::size_t>(type)];
  }

  // Amount of a possessed resource to commit to one task.
  double allocation_for(int parent, int task_type, int resource, double possessed) const {
    if (!(possessed >= 0.0))
      throw std::invalid_argument("MgraoLearner: negative possessed amount");
    return weight_for(parent, task_type, resource) * possessed;
  }

  // Plain-text state dump (9 significant digits, row-major), stable across
  // runs for identical histories. Layout:
  //   mgrao-state v1
  //   alpha/gamma/groups/task_types/resources lines
  //   counts <m integers>
  //   weights resource <r> followed by m rows of n values, per resource
  //   traces resource <r> followed by m rows of n values, per resource
  std::string dump_state() const {
    std::string out;
    out += "mgrao-state v1\n";
    out += "alpha " + to_sig9(config_.alpha) + "\n";
    out += "gamma " + to_sig9(config_.gamma) + "\n";
    out += "groups " + std::to_string(config_.groups) + "\n";
    out += "task_types " + std::to_string(config_.task_types) + "\n";
    out += "resources " + std::to_string(resource_count()) + "\n";
    out += "counts";
    for (long long c : counts_) out += " " + std::to_string(c);
    out += "\n";
    for (int r = 0; r < resource_count(); ++r) {
      out += "weights resource " + std::to_string(r) + "\n";
      append_matrix(out, weights_[r]);
    }
    for (int r = 0; r < resource_count(); ++r) {
      out += "traces resource " + std::to_string(r) + "\n";
      append_matrix(out, traces_[r]);
    }
    return out;
  }

 private:
  static void append_matrix(std::string& out, const Matrix& m) {
    for (int i = 0; i < m.rows(); ++i) {
      for (int j = 0; j < m.cols(); ++j) {
        out += (j == 0 ? "" : " ") + to_sig9(m(i, j));
      }
      out += "\n";
    }
  }

  // Row divergences are the expensive part of a weight query, so they are
  // cached per resource and recomputed only after an update touched them.
  void refresh_divergence(int resource) const {
    if (divergence_fresh_[resource]) return;
    const Matrix& w = weights_[resource];
    for (int i = 0; i < w.rows(); ++i) divergence_[resource][i] = group_entropy(w.row(i));
    divergence_fresh_[resource] = true;
  }

  LearnerConfig config_;
  ParentGroupMap groups_;
  std::vector<Matrix> weights_;
  std::vector<Matrix> traces_;
  std::vector<long long> counts_;
  mutable std::vector<std::vector<double>> divergence_;
  mutable std::vector<bool> divergence_fresh_;
};

}  // namespace mgrao
