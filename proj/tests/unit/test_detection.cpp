#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "covdetect/detection.hpp"
#include "covdetect/error_analysis.hpp"
#include "covdetect/random.hpp"
#include "oracles.hpp"

using namespace covdetect;

TEST(Llr, ScalarHandComputation) {
  // C0 = 1, C1 = 2, no noise, one block: S = log(1/2) + (1 - 1/2) s.
  const CMatrix c0 = CMatrix::Constant(1, 1, 1.0);
  const CMatrix c1 = CMatrix::Constant(1, 1, 2.0);
  for (double s : {0.0, 0.3, 1.0, 7.5}) {
    const CMatrix sample = CMatrix::Constant(1, 1, s);
    const double expected = s / 2.0 - std::log(2.0);
    EXPECT_NEAR(llr_value(sample, 1, c0, c1, 0.0), expected, 1e-12);
    EXPECT_NEAR(llr_closed_form(discrimination(c0, c1, 0.0), sample, 1), expected, 1e-12);
    const ObservationSet obs{CMatrix::Constant(1, 1, std::sqrt(s)), 0.0};
    EXPECT_NEAR(llr_statistic(obs, c0, c1).value, expected, 1e-12);
  }
}

TEST(Llr, IdenticalHypothesesGiveZero) {
  std::mt19937_64 rng(1);
  const CMatrix c = oracle::random_pd(3, 0.5, 2.0, rng);
  const ObservationSet obs{oracle::complex_gaussian(c, 4, rng), 0.1};
  const auto stat = llr_statistic(obs, c, c);
  EXPECT_TRUE(stat.degenerate);
  EXPECT_EQ(stat.value, 0.0);
  EXPECT_EQ(llr_value(sample_covariance(obs), 4, c, c, 0.1), 0.0);
  EXPECT_TRUE(degenerate_hypotheses(c, c));
}

TEST(Llr, PerBlockTermsMatchOracle) {
  std::mt19937_64 rng(2);
  const CMatrix c0 = oracle::random_pd(4, 0.2, 2.0, rng);
  const CMatrix c1 = oracle::random_pd(4, 0.2, 2.0, rng);
  const CMatrix h = oracle::complex_gaussian(c1, 6, rng);
  const auto stat = llr_statistic(ObservationSet{h, 0.3}, c0, c1);
  ASSERT_EQ(stat.per_block.size(), 6);
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(stat.per_block(k), oracle::llr_direct(h.col(k), c0, c1, 0.3), 1e-10);
}

TEST(Llr, PositiveUnderAlternativeForLargeK) {
  std::mt19937_64 rng(3);
  const CMatrix c0 = oracle::random_pd(4, 0.2, 2.0, rng);
  const CMatrix c1 = oracle::random_pd(4, 0.2, 2.0, rng);
  CMatrix e1 = c1;
  e1.diagonal().array() += 0.1;
  int positive = 0;
  for (int t = 0; t < 200; ++t) {
    const ObservationSet obs{oracle::complex_gaussian(e1, 100, rng), 0.1};
    positive += llr_statistic(obs, c0, c1).value > 0.0;
  }
  EXPECT_EQ(positive, 200);
}

TEST(Llr, DimensionMismatchIsConfigurationError) {
  const ObservationSet obs{CMatrix::Ones(3, 2), 0.1};
  EXPECT_THROW((void)llr_statistic(obs, CMatrix::Identity(2, 2), CMatrix::Identity(2, 2) * 2.0),
               InvalidConfiguration);
}

TEST(Llr, SingularEffectiveCovarianceIsDomainError) {
  CMatrix c0 = CMatrix::Identity(2, 2);
  c0(1, 1) = 0.0;
  const ObservationSet obs{CMatrix::Ones(2, 2), 0.0};
  EXPECT_THROW((void)llr_statistic(obs, c0, CMatrix::Identity(2, 2)), NumericalDomainError);
}

TEST(Decide, StrictThresholdTiesGoToH0) {
  EXPECT_EQ(decide(1.0, 1.0).hypothesis, Hypothesis::h0);
  EXPECT_EQ(decide(std::nextafter(1.0, 2.0), 1.0).hypothesis, Hypothesis::h1);
  EXPECT_EQ(decide(-3.0, 1.0).hypothesis, Hypothesis::h0);
  EXPECT_THROW((void)decide(std::numeric_limits<double>::quiet_NaN(), 0.0), InvalidConfiguration);
}

TEST(LogLikelihood, MatchesExplicitFormula) {
  std::mt19937_64 rng(4);
  const CMatrix c = oracle::random_pd(3, 0.5, 2.0, rng);
  const CMatrix s = oracle::random_pd(3, 0.1, 3.0, rng);
  const double n = 0.2;
  CMatrix e = c;
  e.diagonal().array() += n;
  const double expected = -5.0 * (std::log(e.determinant().real()) + (e.inverse() * s).trace().real());
  EXPECT_NEAR(log_likelihood_sum(s, 5, c, n), expected, 1e-10);
}
