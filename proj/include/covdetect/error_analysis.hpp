#pragma once

#include "covdetect/core.hpp"
#include "covdetect/gchi2.hpp"

namespace covdetect {

/// Quantities that separate two hypothesized covariances after adding the
/// estimation noise n:
///   m_matrix      = (C0 + nI)^{-1} - (C1 + nI)^{-1}
///   log_det_ratio = log det(C0 + nI) - log det(C1 + nI)
///   weights_i     = eig((C_i + nI)^{1/2} m_matrix (C_i + nI)^{1/2}), ascending
struct DiscriminationPair {
  CMatrix m_matrix;
  double log_det_ratio = 0.0;
  RVector weights0;
  RVector weights1;
};

[[nodiscard]] DiscriminationPair discrimination(const CMatrix& c0, const CMatrix& c1, double noise_var_eff);

/// S = K (R + tr(m_matrix S_sample)), the closed form of the LLR sum.
[[nodiscard]] double llr_closed_form(const DiscriminationPair& pair, const CMatrix& sample_cov, int blocks);

struct ErrorProbabilities {
  double missed_detection = 0.0;
  double false_alarm = 0.0;
};

/// Exact missed-detection and false-alarm probabilities of the known-C1
/// detector with threshold `threshold` over K blocks.
[[nodiscard]] ErrorProbabilities error_probabilities(const DiscriminationPair& pair, int blocks, double threshold);

/// Throws DegenerateHypotheses when C0 == C1.
[[nodiscard]] ErrorProbabilities error_probabilities(const CMatrix& c0, const CMatrix& c1, double noise_var_eff,
                                                     int blocks, double threshold);

/// Threshold at which the two error probabilities coincide (to 1e-4).
[[nodiscard]] double calibrate_equal_error_threshold(const DiscriminationPair& pair, int blocks);

[[nodiscard]] double calibrate_equal_error_threshold(const CMatrix& c0, const CMatrix& c1, double noise_var_eff,
                                                     int blocks);

}  // namespace covdetect
