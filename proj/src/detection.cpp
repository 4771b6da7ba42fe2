#include "covdetect/detection.hpp"

#include <cmath>

namespace covdetect {

namespace {

void check_square(const CMatrix& a, Eigen::Index dim, const char* what) {
  if (a.rows() != dim || a.cols() != dim) {
    throw InvalidConfiguration(std::string(what) + ": dimension mismatch");
  }
}

}  // namespace

double log_likelihood_sum(const CMatrix& sample_cov, int blocks, const PdFactor& effective) {
  if (blocks < 1) throw InvalidConfiguration("log_likelihood_sum: need at least one block");
  check_square(sample_cov, effective.size(), "log_likelihood_sum");
  return -blocks * (effective.log_det() + effective.trace_solve(sample_cov));
}

double log_likelihood_sum(const CMatrix& sample_cov, int blocks, const CMatrix& cov, double noise_var_eff) {
  return log_likelihood_sum(sample_cov, blocks, PdFactor(effective_covariance(cov, noise_var_eff)));
}

bool degenerate_hypotheses(const CMatrix& c0, const CMatrix& c1) { return nearly_equal(c0, c1, 1e-12); }

LlrStatistic llr_statistic(const ObservationSet& obs, const CMatrix& c0, const CMatrix& c1) {
  const Eigen::Index m = obs.estimates.rows();
  check_square(c0, m, "llr_statistic");
  check_square(c1, m, "llr_statistic");

  LlrStatistic out;
  out.blocks = obs.blocks();
  out.per_block = RVector::Zero(out.blocks);
  if (degenerate_hypotheses(c0, c1)) {
    out.degenerate = true;
    return out;
  }

  const PdFactor f0(effective_covariance(c0, obs.noise_var_eff));
  const PdFactor f1(effective_covariance(c1, obs.noise_var_eff));
  const CMatrix w0 = f0.solve(obs.estimates);
  const CMatrix w1 = f1.solve(obs.estimates);
  for (int k = 0; k < out.blocks; ++k) {
    const double q0 = obs.estimates.col(k).dot(w0.col(k)).real();
    const double q1 = obs.estimates.col(k).dot(w1.col(k)).real();
    out.per_block(k) = (f0.log_det() - f1.log_det()) + q0 - q1;
  }
  out.value = out.per_block.sum();
  return out;
}

double llr_value(const CMatrix& sample_cov, int blocks, const CMatrix& c0, const CMatrix& c1,
                 double noise_var_eff) {
  if (degenerate_hypotheses(c0, c1)) return 0.0;
  return log_likelihood_sum(sample_cov, blocks, c1, noise_var_eff) -
         log_likelihood_sum(sample_cov, blocks, c0, noise_var_eff);
}

Decision decide(double statistic, double threshold) {
  if (std::isnan(statistic) || std::isnan(threshold)) {
    throw InvalidConfiguration("decide: statistic and threshold must not be NaN");
  }
  Decision d;
  d.statistic = statistic;
  d.threshold = threshold;
  d.hypothesis = statistic > threshold ? Hypothesis::h1 : Hypothesis::h0;
  return d;
}

}  // namespace covdetect
