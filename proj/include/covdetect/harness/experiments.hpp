#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "covdetect/harness/config.hpp"

namespace covdetect::harness {

struct ResultRow {
  std::string detector;
  int k = 0;
  double delta_aod_deg = 0.0;
  double threshold = 0.0;
  double p_fa_emp = 0.0;
  double p_md_emp = 0.0;
  std::optional<double> p_fa_analytic;  // genie rows only
  std::optional<double> p_md_analytic;  // genie rows only
  int trials = 0;
  double wall_time_s = 0.0;

  bool operator==(const ResultRow&) const = default;
};

/// Pre- and post-change covariances of one scenario.
struct Scenario {
  CMatrix c0;
  CMatrix c1;
};

/// C0 = one-ring(aod), C1 = one-ring(aod + delta). Throws DegenerateHypotheses
/// when the two coincide.
[[nodiscard]] Scenario make_scenario(const ExperimentConfig& cfg, double delta_aod_deg);

/// Runs fn(i) for i in [0, count) on `threads` workers. Results must be
/// written to per-index slots by the caller so the output is independent of
/// scheduling.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

/// Detection statistics of `trials` paired H0/H1 runs. Trial t under H0 and
/// under H1 share channel and noise draws.
struct TrialStatistics {
  std::vector<double> h0;
  std::vector<double> h1;
};

/// Statistics of one detector for one (K, delta) scenario. `stream` selects a
/// substream of cfg.seed so pilot and measured runs never overlap.
[[nodiscard]] TrialStatistics collect_statistics(const ExperimentConfig& cfg, const Scenario& scenario,
                                                 const DetectorSpec& detector, int k, int trials,
                                                 std::uint64_t stream);

/// Same draws evaluated by several detectors at once.
[[nodiscard]] std::vector<TrialStatistics> collect_statistics(const ExperimentConfig& cfg, const Scenario& scenario,
                                                              const std::vector<DetectorSpec>& detectors, int k,
                                                              int trials, std::uint64_t stream);

/// Empirical rates at threshold t: false alarm = #(h0 > t)/n, miss = #(h1 <= t)/n.
struct EmpiricalRates {
  double p_fa = 0.0;
  double p_md = 0.0;
};
[[nodiscard]] EmpiricalRates empirical_rates(const TrialStatistics& stats, double threshold);

/// Threshold where the empirical false-alarm and miss rates cross, found by
/// bisection over the pooled statistics.
[[nodiscard]] double empirical_equal_error_threshold(const TrialStatistics& stats);

/// Missed-detection rate when the threshold is set so the empirical false
/// alarm rate is at most each target in `p_fa_grid`.
[[nodiscard]] std::vector<double> miss_at_false_alarm(const TrialStatistics& stats,
                                                      const std::vector<double>& p_fa_grid);

/// Known-C1 detector: for every (K, delta) computes the threshold from the
/// policy, runs cfg.trials detections per hypothesis and records empirical
/// and exact error rates.
[[nodiscard]] std::vector<ResultRow> run_genie_experiment(const ExperimentConfig& cfg);

/// Estimated-C1 detectors swept over thresholds; one row per
/// (detector, K, delta, threshold).
[[nodiscard]] std::vector<ResultRow> run_roc_experiment(const ExperimentConfig& cfg);

struct FrameRecord {
  int frame = 0;                  // 1-based
  bool changed = false;           // true covariance differs from the previous frame
  Hypothesis decision = Hypothesis::h0;
  double statistic = 0.0;
  double threshold = 0.0;
  bool reference_updated = false;
};

/// Walks num_frames frames of N blocks. The true covariance switches from C0
/// to C1 at change_frame (if any). Each frame's first K blocks are tested
/// against the reference covariance; on H1 the reference is replaced by the
/// detector's estimate from all N blocks (the true C1 for the genie).
[[nodiscard]] std::vector<FrameRecord> simulate_frames(const ExperimentConfig& cfg, int num_frames,
                                                       std::optional<int> change_frame);

/// Sorted by (detector, K, delta, threshold).
void sort_rows(std::vector<ResultRow>& rows);

}  // namespace covdetect::harness
