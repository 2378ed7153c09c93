#include <gtest/gtest.h>

#include <numeric>

#include "pcraft/poisson.hpp"
#include "support/oracles.hpp"

using pcraft::poisson_weights;

TEST(PoissonWeights, ZeroMeanIsPointMass) {
  const auto w = poisson_weights(0.0, 1e-10);
  EXPECT_EQ(w.left, 0u);
  EXPECT_EQ(w.right, 0u);
  ASSERT_EQ(w.weights.size(), 1u);
  EXPECT_EQ(w.weights[0], 1.0);
}

TEST(PoissonWeights, SmallMeanMatchesDirectPmf) {
  const auto w = poisson_weights(2.0, 1e-10);
  EXPECT_EQ(w.left, 0u);
  for (std::size_t k = 0; k <= w.right; ++k) EXPECT_NEAR(w(k), oracle::poisson_pmf(2.0, static_cast<int>(k)), 1e-12) << k;
}

TEST(PoissonWeights, LargeMeansMatchDirectPmfRelatively) {
  for (double a : {30.0, 517.3, 1e4, 2.5e5, 1e6}) {
    const auto w = poisson_weights(a, 1e-12);
    for (std::size_t k = w.left; k <= w.right; k += std::max<std::size_t>(1, (w.right - w.left) / 50)) {
      const double ref = oracle::poisson_pmf(a, static_cast<int>(k));
      if (ref < 1e-200) continue;
      EXPECT_NEAR(w(k) / ref, 1.0, 1e-9) << "a=" << a << " k=" << k;
    }
  }
}

TEST(PoissonWeights, MassCoversOneMinusTolerance) {
  for (double a : {1e-6, 0.3, 1.0, 7.5, 80.0, 1234.5, 5e5})
    for (double tol : {1e-6, 1e-10, 1e-14}) {
      const auto w = poisson_weights(a, tol);
      const double sum = std::accumulate(w.weights.begin(), w.weights.end(), 0.0);
      EXPECT_GE(sum, 1.0 - tol) << a << " " << tol;
      EXPECT_LE(sum, 1.0 + 1e-12);
    }
}

TEST(PoissonWeights, SurvivalIsTailOfWeights) {
  const auto w = poisson_weights(40.0, 1e-13);
  const auto s = w.survival();
  for (std::size_t k = 0; k <= w.right; ++k) {
    double tail = 0.0;
    for (std::size_t j = k + 1; j <= w.right; ++j) tail += w(j);
    EXPECT_NEAR(s[k], tail, 1e-12) << k;
  }
}

TEST(PoissonWeights, RejectsBadArguments) {
  EXPECT_THROW(poisson_weights(-1.0, 1e-10), pcraft::InvalidArgument);
  EXPECT_THROW(poisson_weights(1.0, 0.0), pcraft::InvalidArgument);
  EXPECT_THROW(poisson_weights(std::nan(""), 1e-10), pcraft::InvalidArgument);
}
