#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace mgrao::reference {

// Deliberately plain re-statement of the update and weighting math, written
// straight from the defining formulas with no caching, no shared helpers and
// no numeric tricks. The production code in learner.hpp is required to agree
// with these functions to 1e-12; the test suite and the `verify` subcommand
// enforce that. Keep this file naive: its value is independence, not speed.

using RowMatrix = std::vector<std::vector<double>>;

inline std::vector<double> sum_normalize(const std::vector<double>& xs) {
  double total = 0.0;
  for (double x : xs) total += x;
  std::vector<double> out(xs.size(), 0.0);
  if (total == 0.0) return out;
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = xs[i] / total;
  return out;
}

inline std::vector<double> softmax(const std::vector<double>& xs) {
  std::vector<double> out(xs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out[i] = std::exp(xs[i]);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

// sum_i p_i * ln(p_i / (1/n)), with 0 * ln 0 taken as 0.
inline double divergence_from_uniform(const std::vector<double>& p) {
  const double uniform = 1.0 / static_cast<double>(p.size());
  double acc = 0.0;
  for (double v : p) {
    if (v > 0.0) acc += v * std::log(v / uniform);
  }
  return acc;
}

inline std::vector<double> blending(const std::vector<long long>& counts,
                                    const RowMatrix& weights) {
  std::vector<double> divergences(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i)
    divergences[i] = divergence_from_uniform(weights[i]);
  std::vector<double> tallies(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) tallies[i] = static_cast<double>(counts[i]);
  std::vector<double> lhs = sum_normalize(divergences);
  std::vector<double> rhs = sum_normalize(tallies);
  std::vector<double> out(lhs.size());
  for (std::size_t i = 0; i < lhs.size(); ++i) out[i] = lhs[i] + rhs[i];
  return out;
}

inline std::vector<double> combined(const std::vector<double>& blending_vec,
                                    const RowMatrix& weights) {
  std::vector<double> mix = sum_normalize(blending_vec);
  std::vector<double> mixed(weights.empty() ? 0 : weights[0].size(), 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (std::size_t j = 0; j < weights[i].size(); ++j) mixed[j] += mix[i] * weights[i][j];
  }
  return softmax(mixed);
}

// Three-way trace rule, cell by cell: the touched cell becomes 1, positive
// cells decay by gamma, everything else stays 0.
inline void trace_update(RowMatrix& traces, std::size_t group, std::size_t type,
                         double gamma) {
  for (std::size_t i = 0; i < traces.size(); ++i) {
    for (std::size_t j = 0; j < traces[i].size(); ++j) {
      if (i == group && j == type) {
        traces[i][j] = 1.0;
      } else if (traces[i][j] > 0.0) {
        traces[i][j] = gamma * traces[i][j];
      } else {
        traces[i][j] = 0.0;
      }
    }
  }
}

// One full update step: refresh traces, add alpha * value * trace to every
// weight cell, then re-normalize each row to sum 1.
inline void update_step(RowMatrix& weights, RowMatrix& traces, std::size_t group,
                        std::size_t type, double value, double alpha, double gamma) {
  trace_update(traces, group, type, gamma);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (std::size_t j = 0; j < weights[i].size(); ++j)
      weights[i][j] += alpha * value * traces[i][j];
    weights[i] = sum_normalize(weights[i]);
  }
}

// One full weighting step: blend, combine, read off the task type's weight.
inline double weighting(const RowMatrix& weights, const std::vector<long long>& counts,
                        std::size_t type) {
  std::vector<double> b = blending(counts, weights);
  std::vector<double> c = combined(b, weights);
  return c[type];
}

}  // namespace mgrao::reference
