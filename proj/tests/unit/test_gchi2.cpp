#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "covdetect/gchi2.hpp"
#include "oracles.hpp"

using namespace covdetect;

namespace {

GchiSqSpec spec_of(std::initializer_list<double> w, int dof) {
  GchiSqSpec s;
  s.weights = Eigen::Map<const RVector>(w.begin(), static_cast<Eigen::Index>(w.size()));
  s.dof_per_component = dof;
  return s;
}

}  // namespace

TEST(Gchi2, UnitWeightIsChiSquared) {
  for (int dof : {2, 4, 10, 40, 200}) {
    const GchiSqSpec s = spec_of({1.0}, dof);
    for (double q : {0.01, 0.2, 0.5, 1.0, 2.0, 5.0}) {
      const double x = q * dof;
      EXPECT_NEAR(gchi2_cdf(s, x).probability, oracle::chi2_cdf_even(x, dof), 1e-6) << "dof " << dof << " x " << x;
    }
  }
}

TEST(Gchi2, ScaleEquivariance) {
  for (double c : {0.3, 2.5, 17.0}) {
    const GchiSqSpec s = spec_of({c}, 6);
    for (double x : {0.5, 3.0, 8.0, 15.0}) {
      EXPECT_NEAR(gchi2_cdf(s, c * x).probability, oracle::chi2_cdf_even(x, 6), 1e-6);
    }
  }
}

TEST(Gchi2, NegativeUnitWeightIsReflectedChiSquared) {
  const GchiSqSpec s = spec_of({-1.0}, 8);
  for (double x : {1.0, 4.0, 9.0}) {
    EXPECT_NEAR(gchi2_cdf(s, -x).probability, 1.0 - oracle::chi2_cdf_even(x, 8), 1e-6);
  }
}

TEST(Gchi2, MixedSignsMatchMonteCarlo) {
  const RVector w = (RVector(2) << 1.0, -0.5).finished();
  const int draws = 1000000;
  auto samples = oracle::gchi2_samples(w, 4, draws, 77);
  std::sort(samples.begin(), samples.end());
  const GchiSqSpec s = spec_of({1.0, -0.5}, 4);
  for (double x : {-6.0, -3.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 12.0}) {
    const double emp = oracle::empirical_cdf(samples, x);
    const double se = oracle::binomial_se(emp, draws);
    EXPECT_NEAR(gchi2_cdf(s, x).probability, emp, 3.0 * se) << "x " << x;
  }
}

TEST(Gchi2, MatchesQuadratureOracle) {
  const RVector w = (RVector(4) << 2.0, 0.7, -0.3, -1.1).finished();
  for (int dof : {2, 4, 10}) {
    const GchiSqSpec s = spec_of({2.0, 0.7, -0.3, -1.1}, dof);
    for (double x : {-20.0, -5.0, -1.0, 0.0, 0.5, 3.0, 10.0, 30.0}) {
      EXPECT_NEAR(gchi2_cdf(s, x).probability, oracle::gchi2_cdf_quadrature(w, dof, x), 1e-6)
          << "dof " << dof << " x " << x;
    }
  }
}

TEST(Gchi2, TailsAndMonotonicity) {
  const GchiSqSpec s = spec_of({2.0, 0.7, -0.3, -1.1}, 6);
  EXPECT_EQ(gchi2_cdf(s, -1e6).probability, 0.0);
  EXPECT_EQ(gchi2_cdf(s, 1e6).probability, 1.0);
  EXPECT_EQ(gchi2_cdf(s, 1e6).method, CdfMethod::tail_bound);
  double prev = 0.0;
  for (double x = -40.0; x <= 80.0; x += 2.5) {
    const double p = gchi2_cdf(s, x).probability;
    EXPECT_GE(p, prev - 1e-9) << x;
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    prev = p;
  }
}

TEST(Gchi2, ExponentialClosedForm) {
  const GchiSqSpec s = spec_of({-2.0}, 2);
  const CdfValue v = gchi2_cdf(s, -3.0);
  EXPECT_EQ(v.method, CdfMethod::exponential);
  EXPECT_NEAR(v.probability, std::exp(-3.0 / 4.0), 1e-14);
}

TEST(Gchi2, DegenerateStep) {
  GchiSqSpec s = GchiSqSpec::from_weights(RVector::Zero(3), 5);
  EXPECT_TRUE(s.degenerate());
  EXPECT_EQ(gchi2_cdf(s, -1e-9).probability, 0.0);
  EXPECT_EQ(gchi2_cdf(s, 0.0).probability, 1.0);
  EXPECT_EQ(gchi2_cdf(s, 0.0).method, CdfMethod::degenerate);
}

TEST(Gchi2, FromWeightsPrunesNegligible) {
  const RVector w = (RVector(3) << 1.0, 1e-15, -0.5).finished();
  const GchiSqSpec s = GchiSqSpec::from_weights(w, 7);
  EXPECT_EQ(s.dof_per_component, 14);
  EXPECT_EQ(s.weights.size(), 2);
}

TEST(Gchi2, InvalidSpec) {
  GchiSqSpec s = spec_of({1.0}, 3);
  EXPECT_THROW((void)gchi2_cdf(s, 1.0), InvalidConfiguration);
  s = spec_of({std::nan("")}, 2);
  EXPECT_THROW((void)gchi2_cdf(s, 1.0), InvalidConfiguration);
}

TEST(Gchi2, MomentsMatchSpec) {
  const GchiSqSpec s = spec_of({1.5, -0.5}, 4);
  EXPECT_DOUBLE_EQ(s.mean(), 4.0);
  EXPECT_DOUBLE_EQ(s.variance(), 2.0 * 4.0 * 2.5);
}

TEST(Gchi2, UpperTailBoundDominatesExactTail) {
  const GchiSqSpec s = spec_of({1.0, 0.4, -0.8}, 10);
  for (double y : {20.0, 40.0, 60.0}) {
    EXPECT_GE(gchi2_upper_tail_bound(s, y) + 1e-12, 1.0 - gchi2_cdf(s, y).probability);
  }
}
