#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace mgrao {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

// Sample standard deviation (n - 1 denominator); 0 for singleton samples.
inline double sample_stddev(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("sample_stddev: empty sample");
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

inline double standard_error(std::span<const double> xs) {
  return sample_stddev(xs) / std::sqrt(static_cast<double>(xs.size()));
}

// One-sided paired t-test: p-value against the alternative mean(a - b) > 0.
// Degenerate zero-variance differences collapse to p = 0 or 1 by sign.
inline double paired_one_sided_p(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_one_sided_p: unpaired samples");
  if (a.size() < 2) throw std::invalid_argument("paired_one_sided_p: need at least two pairs");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const double m = mean(diff);
  const double s = sample_stddev(diff);
  if (s == 0.0) return m > 0.0 ? 0.0 : 1.0;
  const double t = m / (s / std::sqrt(static_cast<double>(diff.size())));
  boost::math::students_t dist(static_cast<double>(diff.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, t));
}

}  // namespace mgrao
