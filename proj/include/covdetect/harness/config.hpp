#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "covdetect/channel_model.hpp"
#include "covdetect/estimation.hpp"

namespace covdetect::harness {

inline constexpr const char* kArtifactVersion = "1.0.0";

enum class DetectorKind { genie, ml, shrinkage };

struct DetectorSpec {
  DetectorKind kind = DetectorKind::genie;
  MlEstimatorConfig ml;  // used when kind == ml

  /// "genie", "shrinkage", "ml:kappa=4" or "ml:kappa=4:beta=0.5"
  [[nodiscard]] std::string label() const;
};

struct EqualErrorThreshold {};
struct ExplicitThreshold {
  double value = 0.0;
};
/// `count` evenly spaced thresholds in [lo, hi]; without a range the sweep
/// spans the observed statistics.
struct ThresholdSweep {
  std::optional<double> lo;
  std::optional<double> hi;
  int count = 50;
};
using ThresholdPolicy = std::variant<EqualErrorThreshold, ExplicitThreshold, ThresholdSweep>;

/// One experiment. Defaults reproduce the reference scenario: 32 antennas,
/// 32-symbol DFT pilots, 0 dB SNR, one-ring spread 20 deg, wavelength 3.76 mm
/// (80 GHz) with 7.52 mm antenna spacing.
struct ExperimentConfig {
  SystemParams system;
  Link link = Link::downlink;
  OneRingParams ring;  // aod_rad is the pre-change AoD
  double carrier_frequency_hz = 80e9;  // metadata only
  std::vector<double> delta_aod_deg{0.1, 0.5, 1.0};
  std::vector<int> k_values{5, 10, 15, 20, 25, 30};
  int trials = 10000;
  std::uint64_t seed = 1;
  ThresholdPolicy threshold = EqualErrorThreshold{};
  std::vector<DetectorSpec> detectors{DetectorSpec{}};
  std::string output_path = "results.csv";
  int threads = 1;
  /// When set, runs must have trials >= 25 / target_error.
  std::optional<double> target_error;
  int num_frames = 20;
  std::optional<int> change_frame;

  void validate() const;
};

[[nodiscard]] ExperimentConfig default_config();

/// Parses the `key = value` format written by to_config_text(). Unknown keys
/// and malformed values raise InvalidConfiguration.
[[nodiscard]] ExperimentConfig parse_config(std::istream& in);
[[nodiscard]] ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(to_config_text(c)) reproduces c.
[[nodiscard]] std::string to_config_text(const ExperimentConfig& cfg);

[[nodiscard]] std::string threshold_text(const ThresholdPolicy& policy);

}  // namespace covdetect::harness
