#include "covdetect/error_analysis.hpp"

#include <algorithm>
#include <cmath>

#include "covdetect/detection.hpp"

namespace covdetect {

namespace {

RVector whitened_eigenvalues(const CMatrix& effective, const CMatrix& m_matrix) {
  const CMatrix root = hermitian_sqrt(effective);
  const CMatrix a = hermitian_part(root.adjoint() * m_matrix * root);
  return Eigen::SelfAdjointEigenSolver<CMatrix>(a, Eigen::EigenvaluesOnly).eigenvalues();
}

bool is_degenerate(const DiscriminationPair& pair) {
  return pair.m_matrix.cwiseAbs().maxCoeff() == 0.0 ||
         (GchiSqSpec::from_weights(pair.weights0, 1).degenerate() &&
          GchiSqSpec::from_weights(pair.weights1, 1).degenerate());
}

}  // namespace

DiscriminationPair discrimination(const CMatrix& c0, const CMatrix& c1, double noise_var_eff) {
  if (c0.rows() != c1.rows() || c0.cols() != c1.cols() || c0.rows() != c0.cols()) {
    throw InvalidConfiguration("discrimination: covariance dimensions differ");
  }
  const Eigen::Index m = c0.rows();
  DiscriminationPair out;
  if (degenerate_hypotheses(c0, c1)) {
    out.m_matrix = CMatrix::Zero(m, m);
    out.weights0 = RVector::Zero(m);
    out.weights1 = RVector::Zero(m);
    return out;
  }
  const CMatrix e0 = effective_covariance(c0, noise_var_eff);
  const CMatrix e1 = effective_covariance(c1, noise_var_eff);
  const PdFactor f0(e0);
  const PdFactor f1(e1);
  out.m_matrix = hermitian_part(f0.inverse() - f1.inverse());
  out.log_det_ratio = f0.log_det() - f1.log_det();
  out.weights0 = whitened_eigenvalues(e0, out.m_matrix);
  out.weights1 = whitened_eigenvalues(e1, out.m_matrix);
  return out;
}

double llr_closed_form(const DiscriminationPair& pair, const CMatrix& sample_cov, int blocks) {
  return blocks * (pair.log_det_ratio + (pair.m_matrix * sample_cov).trace().real());
}

ErrorProbabilities error_probabilities(const DiscriminationPair& pair, int blocks, double threshold) {
  if (is_degenerate(pair)) throw DegenerateHypotheses("error_probabilities: C0 and C1 coincide");
  const double shifted = 2.0 * (threshold - blocks * pair.log_det_ratio);
  ErrorProbabilities out;
  // Miss: S <= threshold under H1, i.e. xi(q1) <= shifted.
  out.missed_detection = gchi2_cdf(GchiSqSpec::from_weights(pair.weights1, blocks), shifted).probability;
  // False alarm: S > threshold under H0, i.e. xi(q0) > shifted, which is
  // P(xi(-q0) < -shifted).
  out.false_alarm = gchi2_cdf(GchiSqSpec::from_weights(-pair.weights0, blocks), -shifted).probability;
  return out;
}

ErrorProbabilities error_probabilities(const CMatrix& c0, const CMatrix& c1, double noise_var_eff, int blocks,
                                       double threshold) {
  return error_probabilities(discrimination(c0, c1, noise_var_eff), blocks, threshold);
}

double calibrate_equal_error_threshold(const DiscriminationPair& pair, int blocks) {
  if (is_degenerate(pair)) throw DegenerateHypotheses("calibrate_equal_error_threshold: C0 and C1 coincide");
  auto gap = [&](double theta) {
    const ErrorProbabilities p = error_probabilities(pair, blocks, theta);
    return p.missed_detection - p.false_alarm;
  };

  // Under H0 the statistic has mean K (R + sum q0) <= 0 and under H1
  // K (R + sum q1) >= 0; the crossing lies in between unless the CDF is
  // flat there, so start from those means and widen if needed.
  const double center = blocks * pair.log_det_ratio;
  const double limit = 1e3 * std::abs(center) + 1e3;
  double lo = blocks * (pair.log_det_ratio + pair.weights0.sum());
  double hi = blocks * (pair.log_det_ratio + pair.weights1.sum());
  if (lo > hi) std::swap(lo, hi);
  double width = std::max(hi - lo, 1.0);
  while (gap(lo) > 0.0) {
    lo -= width;
    width *= 2.0;
    if (lo < center - limit) throw ConvergenceError("equal-error threshold: no lower bracket");
  }
  width = std::max(hi - lo, 1.0);
  while (gap(hi) < 0.0) {
    hi += width;
    width *= 2.0;
    if (hi > center + limit) throw ConvergenceError("equal-error threshold: no upper bracket");
  }

  double best = 0.5 * (lo + hi);
  double best_gap = std::abs(gap(best));
  for (int i = 0; i < 200 && best_gap > 1e-7; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double g = gap(mid);
    if (std::abs(g) < best_gap) {
      best = mid;
      best_gap = std::abs(g);
    }
    if (g > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (hi - lo <= 1e-14 * std::max(1.0, std::abs(mid))) break;
  }
  if (best_gap >= 1e-4) throw ConvergenceError("equal-error threshold: bisection did not reach 1e-4");
  return best;
}

double calibrate_equal_error_threshold(const CMatrix& c0, const CMatrix& c1, double noise_var_eff, int blocks) {
  return calibrate_equal_error_threshold(discrimination(c0, c1, noise_var_eff), blocks);
}

}  // namespace covdetect
