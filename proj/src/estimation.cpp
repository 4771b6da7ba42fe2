#include "covdetect/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace covdetect {

void MlEstimatorConfig::validate() const {
  if (beta && !(*beta > 0.0 && std::isfinite(*beta))) throw InvalidConfiguration("ML estimator: beta must be > 0");
  if (!(kappa > 1.0) || !std::isfinite(kappa)) throw InvalidConfiguration("ML estimator: kappa must be > 1");
}

double MlEstimatorConfig::resolve_beta(const CMatrix& sample_cov, double noise_var_eff) const {
  if (beta) return *beta;
  const double mean_eig = sample_cov.trace().real() / static_cast<double>(sample_cov.rows());
  return std::max((mean_eig - noise_var_eff) / std::sqrt(kappa), 1e-6);
}

EigenSystem ml_covariance_eigen(const CMatrix& sample_cov, double noise_var_eff, const MlEstimatorConfig& cfg) {
  cfg.validate();
  if (!(noise_var_eff >= 0.0)) throw InvalidConfiguration("ml_covariance: noise variance must be >= 0");
  const double beta = cfg.resolve_beta(sample_cov, noise_var_eff);
  const double inv_lo = 1.0 / (cfg.kappa * beta + noise_var_eff);
  const double inv_hi = 1.0 / (beta + noise_var_eff);

  EigenSystem es = hermitian_eigen(sample_cov);
  for (Eigen::Index i = 0; i < es.size(); ++i) {
    const double s = es.values(i);
    const double inv = s > 0.0 ? 1.0 / s : std::numeric_limits<double>::infinity();
    const double clipped = std::min(std::max(inv_lo, inv), inv_hi);
    // Snap the clipped branches to the box ends so 1/x - n rounds exactly.
    double lambda = 1.0 / clipped - noise_var_eff;
    if (clipped == inv_hi) lambda = beta;
    if (clipped == inv_lo) lambda = cfg.kappa * beta;
    es.values(i) = lambda;
  }
  return es;
}

CMatrix ml_covariance(const CMatrix& sample_cov, double noise_var_eff, const MlEstimatorConfig& cfg) {
  return hermitian_part(ml_covariance_eigen(sample_cov, noise_var_eff, cfg).reconstruct());
}

double ml_objective(const CMatrix& sample_cov, const CMatrix& cov, double noise_var_eff) {
  const PdFactor f(effective_covariance(cov, noise_var_eff));
  return f.log_det() + f.trace_solve(sample_cov);
}

ShrinkageEstimate shrinkage_covariance(const CMatrix& sample_cov, int blocks, double noise_var_eff) {
  if (blocks < 2) throw InvalidConfiguration("shrinkage_covariance: needs K >= 2");
  const auto m = static_cast<double>(sample_cov.rows());
  const double tr = sample_cov.trace().real();
  const double tr_sq = (sample_cov * sample_cov).trace().real();
  const double numerator = -tr_sq / m + tr * tr;
  const double denominator = (blocks - 1) / m * (tr_sq - tr * tr / m);

  ShrinkageEstimate out;
  out.rho = 1.0;
  if (denominator > 1e-12 * tr * tr) out.rho = std::clamp(std::min(numerator / denominator, 1.0), 0.0, 1.0);

  const Eigen::Index dim = sample_cov.rows();
  CMatrix shrunk = (1.0 - out.rho) * sample_cov;
  shrunk.diagonal().array() += out.rho * tr / m - noise_var_eff;
  if (out.rho == 1.0) {
    out.covariance = CMatrix::Identity(dim, dim) * std::max(tr / m - noise_var_eff, 0.0);
  } else {
    out.covariance = project_psd(shrunk);
  }
  return out;
}

PluginDetector::PluginDetector(CMatrix c0, double noise_var_eff, Estimator method, MlEstimatorConfig cfg)
    : c0_(std::move(c0)),
      noise_(noise_var_eff),
      method_(method),
      cfg_(cfg),
      f0_(effective_covariance(c0_, noise_var_eff)) {
  cfg_.validate();
}

CMatrix PluginDetector::estimate(const CMatrix& sample_cov, int blocks) const {
  if (method_ == Estimator::ml) return ml_covariance(sample_cov, noise_, cfg_);
  return shrinkage_covariance(sample_cov, blocks, noise_).covariance;
}

PluginStatistic PluginDetector::statistic(const CMatrix& sample_cov, int blocks) const {
  if (sample_cov.rows() != c0_.rows()) throw InvalidConfiguration("detector: dimension mismatch");
  PluginStatistic out;
  if (method_ == Estimator::ml) {
    // C1_hat + nI = Phi diag(lambda + n) Phi^H is known in eigen form, so
    // its log-determinant and inverse come for free.
    const EigenSystem es = ml_covariance_eigen(sample_cov, noise_, cfg_);
    const CMatrix c1 = hermitian_part(es.reconstruct());
    if (degenerate_hypotheses(c0_, c1)) {
      out.degenerate = true;
      return out;
    }
    const RVector eff = es.values.array() + noise_;
    const double log_det1 = eff.array().log().sum();
    const CMatrix rotated = es.vectors.adjoint() * sample_cov * es.vectors;
    const double trace1 = (rotated.diagonal().real().array() / eff.array()).sum();
    const double ll1 = -blocks * (log_det1 + trace1);
    out.value = ll1 - log_likelihood_sum(sample_cov, blocks, f0_);
    return out;
  }
  const CMatrix c1 = shrinkage_covariance(sample_cov, blocks, noise_).covariance;
  if (degenerate_hypotheses(c0_, c1)) {
    out.degenerate = true;
    return out;
  }
  out.value = log_likelihood_sum(sample_cov, blocks, PdFactor(effective_covariance(c1, noise_))) -
              log_likelihood_sum(sample_cov, blocks, f0_);
  return out;
}

Decision detect_unknown(const ObservationSet& obs, const CMatrix& c0, Estimator method,
                        const MlEstimatorConfig& cfg, double threshold) {
  if (c0.rows() != obs.antennas() || c0.cols() != obs.antennas()) {
    throw InvalidConfiguration("detect_unknown: C0 dimension does not match the observations");
  }
  const PluginDetector detector(c0, obs.noise_var_eff, method, cfg);
  const PluginStatistic stat = detector.statistic(sample_covariance(obs), obs.blocks());
  Decision d = decide(stat.value, threshold);
  d.degenerate = stat.degenerate;
  return d;
}

}  // namespace covdetect
