#pragma once

#include <cmath>
#include <cstdint>

#include "covdetect/core.hpp"

namespace covdetect {

/// Link budget and block structure of one detection run.
struct SystemParams {
  int antennas = 32;          // M
  int pilot_length = 32;      // T
  int detection_blocks = 10;  // K, blocks per frame used for detection
  int frame_blocks = 100;     // N, blocks per frame
  double power = 1.0;         // rho, linear
  double noise_variance = 1.0;  // sigma^2, linear; 0 gives noiseless estimates

  /// E0 = rho * T
  [[nodiscard]] double pilot_energy() const { return power * pilot_length; }
  /// sigma^2 / E0, the per-antenna variance of the ML estimation noise.
  [[nodiscard]] double estimation_noise() const { return noise_variance / pilot_energy(); }
  [[nodiscard]] double snr_db() const { return 10.0 * std::log10(power / noise_variance); }

  void validate() const;
};

/// Geometry of the one-ring scattering model. Antenna pair (m1, m2) is
/// separated by D = spacing_factor * (m1 - m2) * wavelength.
struct OneRingParams {
  double aod_rad = 0.0;
  double spread_rad = 0.0;
  double wavelength_m = 3.76e-3;
  double spacing_factor = 2.0;
  int quadrature_points = 2048;

  void validate() const;
};

/// Covariance of the one-ring model for a uniform linear array of `dim`
/// antennas, integrated over the scatterer angle with the composite
/// trapezoid rule. The result is Hermitian-symmetrized and projected onto the
/// PSD cone, then rescaled to unit diagonal. A pre-projection defect below
/// -1e-6 of the top eigenvalue raises ModelFidelityError.
[[nodiscard]] CMatrix one_ring_covariance(const OneRingParams& params, int dim);

/// Same integral without symmetrization or projection. Exposed for
/// diagnostics and tests.
[[nodiscard]] CMatrix one_ring_raw(const OneRingParams& params, int dim);

struct PilotSet {
  CVector uplink;    // x, length T, x^H x = T
  CMatrix downlink;  // X, T x M, X^H X = T I
};

/// DFT-based pilots: X is the first M columns of the unnormalized T-point DFT
/// matrix and x its first column.
[[nodiscard]] PilotSet make_dft_pilots(int pilot_length, int antennas);

enum class Link { uplink, downlink };

/// Draws CN(0, cov) vectors as L z with L the Hermitian square root of cov.
class ChannelSampler {
 public:
  explicit ChannelSampler(const CMatrix& cov);

  [[nodiscard]] CMatrix draw(int blocks, std::uint64_t seed) const;
  [[nodiscard]] const CMatrix& factor() const { return factor_; }
  [[nodiscard]] Eigen::Index dim() const { return factor_.rows(); }

 private:
  CMatrix factor_;
};

/// M x K matrix of i.i.d. CN(0, cov) columns; deterministic in `seed`.
[[nodiscard]] CMatrix sample_channels(const CMatrix& cov, int blocks, std::uint64_t seed);

/// Per-block ML channel estimates h~_k = h_k + n~_k over the K detection blocks.
struct ObservationSet {
  CMatrix estimates;          // M x K
  double noise_var_eff = 0.0;  // sigma^2 / E0

  [[nodiscard]] int blocks() const { return static_cast<int>(estimates.cols()); }
  [[nodiscard]] int antennas() const { return static_cast<int>(estimates.rows()); }
};

/// Synthesizes the received pilots of K = params.detection_blocks blocks on
/// the given link and inverts them with the ML estimator. Channel and noise
/// use separate substreams of `seed`, so uplink and downlink runs with the
/// same seed see identical channels.
[[nodiscard]] ObservationSet observe_and_estimate(const ChannelSampler& channel, const SystemParams& params,
                                                  const PilotSet& pilots, Link link, std::uint64_t seed);

[[nodiscard]] ObservationSet observe_and_estimate(const CMatrix& cov_true, const SystemParams& params,
                                                  const PilotSet& pilots, Link link, std::uint64_t seed);

}  // namespace covdetect
