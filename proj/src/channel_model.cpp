#include "covdetect/channel_model.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "covdetect/random.hpp"

namespace covdetect {

namespace {

constexpr std::uint64_t kChannelStream = 0;
constexpr std::uint64_t kNoiseStream = 1;

}  // namespace

void SystemParams::validate() const {
  if (antennas < 1) throw InvalidConfiguration("antenna count must be positive");
  if (pilot_length < 1) throw InvalidConfiguration("pilot length must be positive");
  if (detection_blocks < 1) throw InvalidConfiguration("detection block count K must be positive");
  if (frame_blocks < detection_blocks) throw InvalidConfiguration("frame length N must be at least K");
  if (!(power > 0.0) || !std::isfinite(power)) throw InvalidConfiguration("transmit power must be positive");
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance))
    throw InvalidConfiguration("noise variance must be non-negative");
}

void OneRingParams::validate() const {
  if (!std::isfinite(aod_rad)) throw InvalidConfiguration("angle of departure must be finite");
  if (!(spread_rad >= 0.0) || !std::isfinite(spread_rad)) throw InvalidConfiguration("angle spread must be >= 0");
  if (!(wavelength_m > 0.0)) throw InvalidConfiguration("wavelength must be positive");
  if (!std::isfinite(spacing_factor)) throw InvalidConfiguration("spacing factor must be finite");
  if (quadrature_points < 64) throw InvalidConfiguration("one-ring quadrature needs at least 64 points");
}

CMatrix one_ring_raw(const OneRingParams& params, int dim) {
  params.validate();
  if (dim < 1) throw InvalidConfiguration("one_ring_covariance: dimension must be positive");

  using std::numbers::pi;
  const int q = params.quadrature_points;
  const double psi2 = params.spread_rad * params.spread_rad;
  const double sin_aod = std::sin(params.aod_rad);
  const double cos_aod = std::cos(params.aod_rad);

  std::vector<double> sin_t(q), cos_2t(q);
  for (int i = 0; i < q; ++i) {
    const double theta = 2.0 * pi * i / q;
    sin_t[i] = std::sin(theta);
    cos_2t[i] = std::cos(2.0 * theta);
  }

  // Entries depend only on m1 - m2, so one integral per lag suffices.
  std::vector<Complex> lag(2 * dim - 1);
  for (int d = -(dim - 1); d <= dim - 1; ++d) {
    const double spacing = params.spacing_factor * d * params.wavelength_m;
    const double phase_scale = 2.0 * pi / params.wavelength_m * spacing * sin_aod;
    const double real_scale = params.spread_rad * spacing * cos_aod;
    Complex acc{0.0, 0.0};
    for (int i = 0; i < q; ++i) {
      const double phase = phase_scale * (1.0 - psi2 / 4.0 + psi2 * cos_2t[i] / 4.0);
      acc += std::exp(Complex(real_scale * sin_t[i], -phase));
    }
    lag[d + dim - 1] = acc / static_cast<double>(q);
  }

  CMatrix out(dim, dim);
  for (int m1 = 0; m1 < dim; ++m1)
    for (int m2 = 0; m2 < dim; ++m2) out(m1, m2) = lag[m1 - m2 + dim - 1];
  return out;
}

CMatrix one_ring_covariance(const OneRingParams& params, int dim) {
  const CMatrix sym = hermitian_part(one_ring_raw(params, dim));
  const RVector ev = Eigen::SelfAdjointEigenSolver<CMatrix>(sym, Eigen::EigenvaluesOnly).eigenvalues();
  const double top = ev.maxCoeff();
  const double bottom = ev.minCoeff();
  if (bottom < -1e-6 * top) {
    throw ModelFidelityError("one-ring covariance is not PSD (min/max eigenvalue ratio " +
                             std::to_string(bottom / top) + ")");
  }
  if (bottom >= 0.0) return sym;
  // Flooring moves the diagonal slightly; rescale it back to one. The
  // congruence D^{-1/2} C D^{-1/2} keeps the matrix PSD.
  const CMatrix projected = project_psd(sym);
  const RVector scale = projected.diagonal().real().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return hermitian_part(scale.asDiagonal() * projected * scale.asDiagonal());
}

PilotSet make_dft_pilots(int pilot_length, int antennas) {
  if (pilot_length < 1 || antennas < 1) throw InvalidConfiguration("pilot dimensions must be positive");
  if (pilot_length < antennas) {
    throw InvalidConfiguration("downlink pilots need T >= M (T=" + std::to_string(pilot_length) +
                               ", M=" + std::to_string(antennas) + ")");
  }
  using std::numbers::pi;
  PilotSet out;
  out.downlink.resize(pilot_length, antennas);
  for (int t = 0; t < pilot_length; ++t) {
    for (int m = 0; m < antennas; ++m) {
      // Reduce the exponent mod T before scaling to keep the angle small.
      const long long k = (static_cast<long long>(t) * m) % pilot_length;
      out.downlink(t, m) = std::polar(1.0, -2.0 * pi * static_cast<double>(k) / pilot_length);
    }
  }
  out.uplink = out.downlink.col(0);
  return out;
}

ChannelSampler::ChannelSampler(const CMatrix& cov) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) {
    throw InvalidConfiguration("channel covariance must be a non-empty square matrix");
  }
  if (!is_psd(cov, 1e-10)) throw NumericalDomainError("channel covariance is not Hermitian PSD");
  factor_ = hermitian_sqrt(cov);
}

CMatrix ChannelSampler::draw(int blocks, std::uint64_t seed) const {
  if (blocks < 1) throw InvalidConfiguration("need at least one block");
  ComplexNormalSource source(derive_seed(seed, {kChannelStream}));
  return factor_ * source.matrix(dim(), blocks);
}

CMatrix sample_channels(const CMatrix& cov, int blocks, std::uint64_t seed) {
  return ChannelSampler(cov).draw(blocks, seed);
}

ObservationSet observe_and_estimate(const ChannelSampler& channel, const SystemParams& params,
                                    const PilotSet& pilots, Link link, std::uint64_t seed) {
  params.validate();
  const int m = params.antennas;
  const int t = params.pilot_length;
  const int k = params.detection_blocks;
  if (channel.dim() != m) throw InvalidConfiguration("covariance dimension does not match antenna count");

  const double amplitude = std::sqrt(params.power);
  const CMatrix channels = channel.draw(k, seed);
  ComplexNormalSource noise(derive_seed(seed, {kNoiseStream}));

  ObservationSet obs;
  obs.noise_var_eff = params.estimation_noise();
  obs.estimates.resize(m, k);

  if (link == Link::uplink) {
    if (pilots.uplink.size() != t) throw InvalidConfiguration("uplink pilot length does not match T");
    for (int b = 0; b < k; ++b) {
      // Y = sqrt(rho) h x^H + N,  h~ = Y x / (sqrt(rho) T)
      const CMatrix received = amplitude * channels.col(b) * pilots.uplink.adjoint() +
                               noise.matrix(m, t, params.noise_variance);
      obs.estimates.col(b) = received * pilots.uplink / (amplitude * t);
    }
  } else {
    if (pilots.downlink.rows() != t || pilots.downlink.cols() != m) {
      throw InvalidConfiguration("downlink pilot matrix must be T x M");
    }
    for (int b = 0; b < k; ++b) {
      // y = sqrt(rho) X h + n,  h~ = X^H y / (sqrt(rho) T)
      const CVector received = amplitude * pilots.downlink * channels.col(b) +
                               CVector(noise.matrix(t, 1, params.noise_variance));
      obs.estimates.col(b) = pilots.downlink.adjoint() * received / (amplitude * t);
    }
  }
  return obs;
}

ObservationSet observe_and_estimate(const CMatrix& cov_true, const SystemParams& params, const PilotSet& pilots,
                                    Link link, std::uint64_t seed) {
  return observe_and_estimate(ChannelSampler(cov_true), params, pilots, link, seed);
}

}  // namespace covdetect
