#pragma once

#include <optional>

#include "covdetect/channel_model.hpp"
#include "covdetect/core.hpp"
#include "covdetect/detection.hpp"

namespace covdetect {

/// Eigenvalue box beta <= lambda(C) <= kappa * beta for the constrained ML
/// estimate. When `beta` is empty it is derived from the data, see
/// resolve_beta().
struct MlEstimatorConfig {
  std::optional<double> beta;
  double kappa = 4.0;

  void validate() const;
  /// beta if set, otherwise max((tr(S)/M - n) / sqrt(kappa), 1e-6), which
  /// centers [beta, kappa beta] geometrically on the mean signal eigenvalue.
  [[nodiscard]] double resolve_beta(const CMatrix& sample_cov, double noise_var_eff) const;
};

/// Maximum-likelihood covariance under the condition-number constraint, as an
/// eigensystem sharing the eigenvectors of the sample covariance. With
/// n = noise_var_eff, each inverse sample eigenvalue is clipped into
/// [1/(kappa beta + n), 1/(beta + n)] and mapped back to 1/lambda - n, so
/// every returned eigenvalue lies in [beta, kappa beta].
[[nodiscard]] EigenSystem ml_covariance_eigen(const CMatrix& sample_cov, double noise_var_eff,
                                              const MlEstimatorConfig& cfg);

[[nodiscard]] CMatrix ml_covariance(const CMatrix& sample_cov, double noise_var_eff, const MlEstimatorConfig& cfg);

/// log det(cov + nI) + tr((cov + nI)^{-1} S); the constrained ML estimate
/// minimizes this over the feasible box.
[[nodiscard]] double ml_objective(const CMatrix& sample_cov, const CMatrix& cov, double noise_var_eff);

struct ShrinkageEstimate {
  CMatrix covariance;
  double rho = 1.0;  // weight on the scaled identity, clamped to [0, 1]
};

/// Shrinks S toward tr(S)/M * I with the data-driven weight
///   rho = min((tr^2(S) - tr(S^2)/M) / ((K-1)/M (tr(S^2) - tr^2(S)/M)), 1),
/// subtracts nI and floors negative eigenvalues at 0. Requires K >= 2.
[[nodiscard]] ShrinkageEstimate shrinkage_covariance(const CMatrix& sample_cov, int blocks, double noise_var_eff);

enum class Estimator { ml, shrinkage };

/// Plug-in LLR detector: estimate C1 from the observations, then compare the
/// LLR statistic S(H, C0, C1_hat) with `threshold`.
[[nodiscard]] Decision detect_unknown(const ObservationSet& obs, const CMatrix& c0, Estimator method,
                                      const MlEstimatorConfig& cfg, double threshold);

/// The statistic used by detect_unknown, with precomputed factorization of
/// C0 + nI. Also reports whether C1_hat coincided with C0.
struct PluginStatistic {
  double value = 0.0;
  bool degenerate = false;
};

class PluginDetector {
 public:
  PluginDetector(CMatrix c0, double noise_var_eff, Estimator method, MlEstimatorConfig cfg);

  [[nodiscard]] PluginStatistic statistic(const CMatrix& sample_cov, int blocks) const;
  [[nodiscard]] CMatrix estimate(const CMatrix& sample_cov, int blocks) const;

 private:
  CMatrix c0_;
  double noise_;
  Estimator method_;
  MlEstimatorConfig cfg_;
  PdFactor f0_;
};

}  // namespace covdetect
