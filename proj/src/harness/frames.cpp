#include <algorithm>

#include "covdetect/detection.hpp"
#include "covdetect/error_analysis.hpp"
#include "covdetect/estimation.hpp"
#include "covdetect/harness/experiments.hpp"
#include "covdetect/random.hpp"
#include "harness/internal.hpp"

namespace covdetect::harness {

namespace {

constexpr std::uint64_t kPilotStream = 1;
constexpr std::uint64_t kFrameStream = 2;

Estimator estimator_of(DetectorKind kind) { return kind == DetectorKind::ml ? Estimator::ml : Estimator::shrinkage; }

}  // namespace

std::vector<FrameRecord> simulate_frames(const ExperimentConfig& cfg, int num_frames, std::optional<int> change_frame) {
  cfg.validate();
  if (num_frames < 1) throw InvalidConfiguration("simulate_frames: num_frames must be >= 1");
  if (change_frame && (*change_frame < 1 || *change_frame > num_frames)) {
    throw InvalidConfiguration("simulate_frames: change_frame must lie in [1, num_frames]");
  }
  if (std::holds_alternative<ThresholdSweep>(cfg.threshold)) {
    throw InvalidConfiguration("simulate_frames: threshold sweeps are not supported, use equal-error or explicit");
  }

  const DetectorSpec& detector = cfg.detectors.front();
  const int k = cfg.k_values.front();
  const Scenario scenario = make_scenario(cfg, cfg.delta_aod_deg.front());
  const SystemParams detect_sys = system_for(cfg, k);
  SystemParams frame_sys = detect_sys;
  frame_sys.detection_blocks = frame_sys.frame_blocks;
  const double noise = detect_sys.estimation_noise();
  const PilotSet pilots = pilots_for(cfg);
  const ChannelSampler before(scenario.c0);
  const ChannelSampler after(scenario.c1);

  // The hypothesis pair the detector is tuned for: the current reference
  // and the covariance a change would lead to.
  auto threshold_for = [&](const CMatrix& reference, const CMatrix& alternative) {
    if (const auto* e = std::get_if<ExplicitThreshold>(&cfg.threshold)) return e->value;
    if (detector.kind == DetectorKind::genie) {
      return calibrate_equal_error_threshold(discrimination(reference, alternative, noise), k);
    }
    const int pilot_trials = std::max(cfg.trials / 10, 1);
    const TrialStatistics pilot =
        collect_statistics(cfg, Scenario{reference, alternative}, detector, k, pilot_trials, kPilotStream);
    return empirical_equal_error_threshold(pilot);
  };

  CMatrix reference = scenario.c0;
  CMatrix alternative = scenario.c1;
  double threshold = threshold_for(reference, alternative);

  std::vector<FrameRecord> log;
  log.reserve(num_frames);
  for (int f = 1; f <= num_frames; ++f) {
    const bool after_change = change_frame && f >= *change_frame;
    const std::uint64_t seed = derive_seed(cfg.seed, {kFrameStream, static_cast<std::uint64_t>(f)});
    const ObservationSet frame =
        observe_and_estimate(after_change ? after : before, frame_sys, pilots, cfg.link, seed);
    const CMatrix window_cov = sample_covariance(frame.estimates.leftCols(k));

    double statistic = 0.0;
    if (detector.kind == DetectorKind::genie) {
      statistic = llr_closed_form(discrimination(reference, alternative, noise), window_cov, k);
    } else {
      statistic = PluginDetector(reference, noise, estimator_of(detector.kind), detector.ml).statistic(window_cov, k).value;
    }

    FrameRecord rec;
    rec.frame = f;
    rec.changed = change_frame && f == *change_frame;
    rec.statistic = statistic;
    rec.threshold = threshold;
    rec.decision = decide(statistic, threshold).hypothesis;
    if (rec.decision == Hypothesis::h1) {
      const CMatrix previous = reference;
      if (detector.kind == DetectorKind::genie) {
        reference = after_change ? scenario.c1 : scenario.c0;
      } else {
        const PluginDetector estimator(previous, noise, estimator_of(detector.kind), detector.ml);
        reference = estimator.estimate(sample_covariance(frame), frame.blocks());
      }
      // Test the new reference against whichever covariance of the pair it is farther from.
      const double d0 = (reference - scenario.c0).norm();
      const double d1 = (reference - scenario.c1).norm();
      alternative = d0 <= d1 ? scenario.c1 : scenario.c0;
      rec.reference_updated = true;
      if (!degenerate_hypotheses(reference, alternative)) threshold = threshold_for(reference, alternative);
    }
    log.push_back(rec);
  }
  return log;
}

}  // namespace covdetect::harness
