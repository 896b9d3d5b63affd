// Core math operations: normalization, softmax, divergence, blending and
// combination. Expected values are frozen literals worked out independently
// of the implementation; property checks run over seeded random inputs.

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "mgrao/learner.hpp"
#include "mgrao/reference.hpp"

namespace {

using mgrao::blending_vector;
using mgrao::combined_weights;
using mgrao::group_entropy;
using mgrao::Matrix;
using mgrao::softmax;
using mgrao::sum_normalize;

constexpr double kSoftmaxHi = 0.7310585786300049;  // e / (e + 1)
constexpr double kSoftmaxLo = 0.2689414213699951;
constexpr double kLn2 = 0.6931471805599453;
constexpr double kLn20 = 2.995732273553991;
constexpr double kDivergenceSkewed = 0.13081203594113697;  // [0.75, 0.25]

std::vector<double> random_distribution(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<double> v(n);
  double total = 0.0;
  for (double& x : v) {
    x = u01(rng) + 1e-3;
    total += x;
  }
  for (double& x : v) x /= total;
  return v;
}

Matrix random_weight_matrix(std::mt19937_64& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const auto row = random_distribution(rng, cols);
    for (int j = 0; j < cols; ++j) m(i, j) = row[j];
  }
  return m;
}

TEST(SumNormalize, PreservesRatios) {
  const auto out = sum_normalize(std::vector<double>{1.0, 1.0, 2.0});
  EXPECT_NEAR(out[0], 0.25, 1e-15);
  EXPECT_NEAR(out[1], 0.25, 1e-15);
  EXPECT_NEAR(out[2], 0.50, 1e-15);
}

TEST(SumNormalize, SkewedPair) {
  const auto out = sum_normalize(std::vector<double>{3.0, 1.0});
  EXPECT_NEAR(out[0], 0.75, 1e-15);
  EXPECT_NEAR(out[1], 0.25, 1e-15);
}

TEST(SumNormalize, ZeroVectorMapsToItself) {
  const auto out = sum_normalize(std::vector<double>{0.0, 0.0, 0.0});
  for (double v : out) EXPECT_EQ(v, 0.0);
}

TEST(SumNormalize, SumsToOneAndKeepsArgmax) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 30);
    std::vector<double> in(n);
    for (double& v : in) v = u01(rng) * 10.0;
    in[rng() % n] += 5.0;  // make the argmax unambiguous
    const auto out = sum_normalize(in);
    double total = 0.0;
    int argmax_in = 0, argmax_out = 0;
    for (int i = 0; i < n; ++i) {
      EXPECT_GE(out[i], 0.0);
      total += out[i];
      if (in[i] > in[argmax_in]) argmax_in = i;
      if (out[i] > out[argmax_out]) argmax_out = i;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_EQ(argmax_in, argmax_out);
  }
}

TEST(SumNormalize, RejectsNegativeEntries) {
  EXPECT_THROW(sum_normalize(std::vector<double>{1.0, -0.5}), std::invalid_argument);
}

TEST(Softmax, UniformInputGivesUniformOutput) {
  const auto out = softmax(std::vector<double>{0.0, 0.0});
  EXPECT_NEAR(out[0], 0.5, 1e-15);
  EXPECT_NEAR(out[1], 0.5, 1e-15);
}

TEST(Softmax, KnownPair) {
  const auto out = softmax(std::vector<double>{1.0, 0.0});
  EXPECT_NEAR(out[0], kSoftmaxHi, 1e-15);
  EXPECT_NEAR(out[1], kSoftmaxLo, 1e-15);
}

TEST(Softmax, ShiftInvariant) {
  const std::vector<double> base{0.3, -1.2, 2.5, 0.0};
  const auto a = softmax(base);
  for (double shift : {-7.0, 3.0, 40.0}) {
    std::vector<double> shifted = base;
    for (double& v : shifted) v += shift;
    const auto b = softmax(shifted);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(Softmax, ProbabilityVectorAndOrderPreserving) {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 20);
    std::vector<double> in(n);
    for (double& v : in) v = u(rng);
    const auto out = softmax(in);
    double total = 0.0;
    for (double v : out) {
      EXPECT_GT(v, 0.0);
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (in[i] < in[j]) EXPECT_LE(out[i], out[j]);
      }
    }
  }
}

TEST(Softmax, RejectsNonFinite) {
  EXPECT_THROW(softmax(std::vector<double>{1.0, std::nan("")}), std::invalid_argument);
  EXPECT_THROW(softmax(std::vector<double>{}), std::invalid_argument);
}

TEST(GroupEntropy, UniformRowIsZero) {
  EXPECT_NEAR(group_entropy(std::vector<double>{0.5, 0.5}), 0.0, 1e-15);
  EXPECT_NEAR(group_entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}), 0.0, 1e-15);
}

TEST(GroupEntropy, OneHotRowIsLogN) {
  EXPECT_NEAR(group_entropy(std::vector<double>{1.0, 0.0}), kLn2, 1e-15);
  EXPECT_NEAR(group_entropy(std::vector<double>{0.0, 0.0, 1.0, 0.0}), 2.0 * kLn2, 1e-12);
}

TEST(GroupEntropy, SkewedPair) {
  EXPECT_NEAR(group_entropy(std::vector<double>{0.75, 0.25}), kDivergenceSkewed, 1e-15);
}

TEST(GroupEntropy, BoundedByLogN) {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 19);  // up to 20 types
    const auto p = random_distribution(rng, n);
    const double d = group_entropy(p);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, std::log(static_cast<double>(n)) + 1e-12);
    if (n == 20) EXPECT_LE(d, kLn20 + 1e-12);
  }
}

TEST(GroupEntropy, PositiveOffUniform) {
  std::vector<double> p{0.26, 0.24, 0.25, 0.25};
  EXPECT_GT(group_entropy(p), 0.0);
}

TEST(GroupEntropy, RejectsUnnormalizedOrNegative) {
  EXPECT_THROW(group_entropy(std::vector<double>{0.5, 0.2}), std::invalid_argument);
  EXPECT_THROW(group_entropy(std::vector<double>{1.5, -0.5}), std::invalid_argument);
}

TEST(GroupEntropy, MatchesTranscription) {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 10);
    const auto p = random_distribution(rng, n);
    EXPECT_NEAR(group_entropy(p), mgrao::reference::divergence_from_uniform(p), 1e-12);
  }
}

TEST(BlendingVector, CountsOnly) {
  Matrix w(2, 2, 0.5);
  const std::vector<long long> counts{3, 1};
  const auto b = blending_vector(counts, w);
  EXPECT_NEAR(b[0], 0.75, 1e-15);
  EXPECT_NEAR(b[1], 0.25, 1e-15);
}

TEST(BlendingVector, DivergenceOnly) {
  Matrix w(2, 2, 0.5);
  w(0, 0) = 1.0;
  w(0, 1) = 0.0;
  const std::vector<long long> counts{0, 0};
  const auto b = blending_vector(counts, w);
  EXPECT_NEAR(b[0], 1.0, 1e-15);
  EXPECT_NEAR(b[1], 0.0, 1e-15);
}

TEST(BlendingVector, BothSignals) {
  Matrix w(2, 2, 0.0);
  w(0, 0) = 1.0;
  w(1, 0) = 1.0;
  const std::vector<long long> counts{1, 1};
  const auto b = blending_vector(counts, w);
  EXPECT_NEAR(b[0], 1.0, 1e-15);
  EXPECT_NEAR(b[1], 1.0, 1e-15);
}

TEST(BlendingVector, EntriesWithinRange) {
  std::mt19937_64 rng(505);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 6);
    const int n = 2 + static_cast<int>(rng() % 6);
    const Matrix w = random_weight_matrix(rng, m, n);
    std::vector<long long> counts(m);
    for (auto& c : counts) c = static_cast<long long>(rng() % 50);
    const auto b = blending_vector(counts, w);
    for (double v : b) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 2.0 + 1e-12);
    }
  }
}

TEST(BlendingVector, RejectsShapeMismatch) {
  Matrix w(2, 3, 1.0 / 3.0);
  EXPECT_THROW(blending_vector(std::vector<long long>{1, 2, 3}, w), std::invalid_argument);
}

TEST(CombinedWeights, SingleGroupIsSoftmaxOfRow) {
  Matrix w(1, 2, 0.0);
  w(0, 0) = 1.0;
  const auto c = combined_weights(std::vector<double>{1.0}, w);
  EXPECT_NEAR(c[0], kSoftmaxHi, 1e-15);
  EXPECT_NEAR(c[1], kSoftmaxLo, 1e-15);
}

TEST(CombinedWeights, TwoGroupMixture) {
  Matrix w(2, 2, 0.0);
  w(0, 0) = 1.0;
  w(1, 1) = 1.0;
  const auto c = combined_weights(std::vector<double>{0.75, 0.25}, w);
  EXPECT_NEAR(c[0], 0.6224593312018546, 1e-15);
  EXPECT_NEAR(c[1], 0.3775406687981454, 1e-15);
}

TEST(CombinedWeights, UniformRowsGiveUniformOutput) {
  Matrix w(3, 4, 0.25);
  const auto c = combined_weights(std::vector<double>{0.2, 1.7, 0.4}, w);
  for (double v : c) EXPECT_NEAR(v, 0.25, 1e-12);
}

TEST(CombinedWeights, ProbabilityVector) {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 5);
    const int n = 2 + static_cast<int>(rng() % 8);
    const Matrix w = random_weight_matrix(rng, m, n);
    std::vector<double> blend(m);
    for (double& v : blend) v = u01(rng) * 2.0;
    const auto c = combined_weights(blend, w);
    double total = 0.0;
    for (double v : c) {
      EXPECT_GT(v, 0.0);
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(CombinedWeights, MatchesTranscription) {
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 3);
    const int n = 2 + static_cast<int>(rng() % 3);
    const Matrix w = random_weight_matrix(rng, m, n);
    mgrao::reference::RowMatrix rw(m, std::vector<double>(n));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) rw[i][j] = w(i, j);
    std::vector<double> blend(m);
    for (double& v : blend) v = u01(rng) * 2.0;
    const auto a = combined_weights(blend, w);
    const auto b = mgrao::reference::combined(blend, rw);
    for (int j = 0; j < n; ++j) EXPECT_NEAR(a[j], b[j], 1e-12);
  }
}

TEST(CombinedWeights, RejectsShapeMismatch) {
  Matrix w(2, 2, 0.5);
  EXPECT_THROW(combined_weights(std::vector<double>{1.0}, w), std::invalid_argument);
}

}  // namespace
