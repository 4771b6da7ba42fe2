#pragma once

#include <cmath>

#include "covdetect/channel_model.hpp"
#include "covdetect/core.hpp"

namespace covdetect {

/// (1/K) H H^H for an M x K matrix of channel estimates.
template <typename Derived>
[[nodiscard]] CMatrix sample_covariance(const Eigen::MatrixBase<Derived>& estimates) {
  if (estimates.cols() < 1) throw InvalidConfiguration("sample_covariance: empty observation set");
  CMatrix s = estimates * estimates.adjoint() / static_cast<double>(estimates.cols());
  return hermitian_part(s);
}

[[nodiscard]] inline CMatrix sample_covariance(const ObservationSet& obs) {
  return sample_covariance(obs.estimates);
}

/// cov + noise * I, the covariance of the noisy channel estimate.
template <typename Derived>
[[nodiscard]] CMatrix effective_covariance(const Eigen::MatrixBase<Derived>& cov, double noise_var_eff) {
  if (!(noise_var_eff >= 0.0)) throw InvalidConfiguration("effective noise variance must be non-negative");
  CMatrix out = cov;
  out.diagonal().array() += noise_var_eff;
  return out;
}

/// Complex-Gaussian log-likelihood of K blocks with sample covariance S under
/// covariance cov, without the -K M log(pi) constant:
///   -K (log det(cov + nI) + tr((cov + nI)^{-1} S)).
[[nodiscard]] double log_likelihood_sum(const CMatrix& sample_cov, int blocks, const CMatrix& cov,
                                        double noise_var_eff);

/// Same quantity from a pre-factored effective covariance.
[[nodiscard]] double log_likelihood_sum(const CMatrix& sample_cov, int blocks, const PdFactor& effective);

struct LlrStatistic {
  double value = 0.0;
  RVector per_block;   // LLR_k, k = 1..K
  int blocks = 0;
  bool degenerate = false;  // C0 == C1, value identically 0
};

/// Per-block LLRs log p(h~_k | C1) - log p(h~_k | C0) and their sum.
[[nodiscard]] LlrStatistic llr_statistic(const ObservationSet& obs, const CMatrix& c0, const CMatrix& c1);

/// S(H, C0, C1) from the sample covariance, as the difference of the two
/// log-likelihood sums. Returns 0 when C0 and C1 agree to 1e-12.
[[nodiscard]] double llr_value(const CMatrix& sample_cov, int blocks, const CMatrix& c0, const CMatrix& c1,
                               double noise_var_eff);

/// True when C0 and C1 agree to 1e-12 relative, making the test uninformative.
[[nodiscard]] bool degenerate_hypotheses(const CMatrix& c0, const CMatrix& c1);

enum class Hypothesis { h0, h1 };

struct Decision {
  Hypothesis hypothesis = Hypothesis::h0;
  double statistic = 0.0;
  double threshold = 0.0;
  bool degenerate = false;
};

/// H1 iff statistic > threshold; ties go to H0.
[[nodiscard]] Decision decide(double statistic, double threshold);

[[nodiscard]] constexpr const char* to_string(Hypothesis h) { return h == Hypothesis::h1 ? "H1" : "H0"; }

}  // namespace covdetect
