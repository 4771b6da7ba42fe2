#include "covdetect/harness/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>
#include <tuple>

#include "covdetect/detection.hpp"
#include "covdetect/error_analysis.hpp"
#include "covdetect/estimation.hpp"
#include "covdetect/random.hpp"
#include "harness/internal.hpp"

namespace covdetect::harness {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr std::uint64_t kMeasuredStream = 0;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// One detector bound to a scenario's C0.
class BoundDetector {
 public:
  BoundDetector(const DetectorSpec& spec, const Scenario& scenario, double noise) : kind_(spec.kind) {
    if (kind_ == DetectorKind::genie) {
      pair_ = discrimination(scenario.c0, scenario.c1, noise);
    } else {
      plugin_.emplace(scenario.c0, noise, kind_ == DetectorKind::ml ? Estimator::ml : Estimator::shrinkage,
                      spec.ml);
    }
  }

  [[nodiscard]] double statistic(const CMatrix& sample_cov, int blocks) const {
    if (kind_ == DetectorKind::genie) return llr_closed_form(pair_, sample_cov, blocks);
    return plugin_->statistic(sample_cov, blocks).value;
  }

 private:
  DetectorKind kind_;
  DiscriminationPair pair_;
  std::optional<PluginDetector> plugin_;
};

std::vector<double> sweep_thresholds(const ThresholdSweep& sweep, const TrialStatistics& stats) {
  double lo = 0.0;
  double hi = 0.0;
  if (sweep.lo && sweep.hi) {
    lo = *sweep.lo;
    hi = *sweep.hi;
  } else {
    auto [min0, max0] = std::minmax_element(stats.h0.begin(), stats.h0.end());
    auto [min1, max1] = std::minmax_element(stats.h1.begin(), stats.h1.end());
    const double smallest = std::min(*min0, *min1);
    const double largest = std::max(*max0, *max1);
    // Start just below every statistic so the first point is (P_FA, P_MD) = (1, 0).
    lo = std::nextafter(smallest, -std::numeric_limits<double>::infinity());
    hi = largest;
    if (!(hi > lo)) hi = lo + 1.0;
  }
  std::vector<double> out(sweep.count);
  for (int i = 0; i < sweep.count; ++i) out[i] = lo + (hi - lo) * i / (sweep.count - 1);
  out.back() = hi;
  return out;
}

}  // namespace

SystemParams system_for(const ExperimentConfig& cfg, int k) {
  SystemParams sys = cfg.system;
  sys.detection_blocks = k;
  sys.frame_blocks = std::max(sys.frame_blocks, k);
  return sys;
}

PilotSet pilots_for(const ExperimentConfig& cfg) {
  if (cfg.link == Link::downlink) return make_dft_pilots(cfg.system.pilot_length, cfg.system.antennas);
  PilotSet p = make_dft_pilots(cfg.system.pilot_length, 1);
  return p;
}

Scenario make_scenario(const ExperimentConfig& cfg, double delta_aod_deg) {
  OneRingParams after = cfg.ring;
  after.aod_rad += delta_aod_deg * kDeg;
  Scenario s{one_ring_covariance(cfg.ring, cfg.system.antennas), one_ring_covariance(after, cfg.system.antennas)};
  if (degenerate_hypotheses(s.c0, s.c1)) {
    throw DegenerateHypotheses("pre- and post-change covariances coincide (delta_aod_deg = " +
                               std::to_string(delta_aod_deg) + ")");
  }
  return s;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min(threads, count);
  pool.reserve(n);
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<TrialStatistics> collect_statistics(const ExperimentConfig& cfg, const Scenario& scenario,
                                                const std::vector<DetectorSpec>& detectors, int k, int trials,
                                                std::uint64_t stream) {
  if (trials < 1) throw InvalidConfiguration("collect_statistics: trials must be >= 1");
  const SystemParams sys = system_for(cfg, k);
  sys.validate();
  const PilotSet pilots = pilots_for(cfg);
  const ChannelSampler before(scenario.c0);
  const ChannelSampler after(scenario.c1);
  const double noise = sys.estimation_noise();

  std::vector<BoundDetector> bound;
  bound.reserve(detectors.size());
  for (const auto& d : detectors) bound.emplace_back(d, scenario, noise);

  std::vector<TrialStatistics> out(detectors.size());
  for (auto& s : out) {
    s.h0.assign(trials, 0.0);
    s.h1.assign(trials, 0.0);
  }
  parallel_for(trials, cfg.threads, [&](int t) {
    const std::uint64_t seed = derive_seed(cfg.seed, {stream, static_cast<std::uint64_t>(k),
                                                      static_cast<std::uint64_t>(t)});
    const CMatrix s0 = sample_covariance(observe_and_estimate(before, sys, pilots, cfg.link, seed));
    const CMatrix s1 = sample_covariance(observe_and_estimate(after, sys, pilots, cfg.link, seed));
    for (std::size_t d = 0; d < bound.size(); ++d) {
      out[d].h0[t] = bound[d].statistic(s0, k);
      out[d].h1[t] = bound[d].statistic(s1, k);
    }
  });
  return out;
}

TrialStatistics collect_statistics(const ExperimentConfig& cfg, const Scenario& scenario,
                                   const DetectorSpec& detector, int k, int trials, std::uint64_t stream) {
  return std::move(collect_statistics(cfg, scenario, std::vector<DetectorSpec>{detector}, k, trials, stream)[0]);
}

EmpiricalRates empirical_rates(const TrialStatistics& stats, double threshold) {
  EmpiricalRates r;
  if (!stats.h0.empty()) {
    const auto fa = std::count_if(stats.h0.begin(), stats.h0.end(), [&](double s) { return s > threshold; });
    r.p_fa = static_cast<double>(fa) / static_cast<double>(stats.h0.size());
  }
  if (!stats.h1.empty()) {
    const auto md = std::count_if(stats.h1.begin(), stats.h1.end(), [&](double s) { return s <= threshold; });
    r.p_md = static_cast<double>(md) / static_cast<double>(stats.h1.size());
  }
  return r;
}

double empirical_equal_error_threshold(const TrialStatistics& stats) {
  if (stats.h0.empty() || stats.h1.empty()) throw InvalidConfiguration("equal-error calibration needs statistics");
  double lo = std::min(*std::min_element(stats.h0.begin(), stats.h0.end()),
                       *std::min_element(stats.h1.begin(), stats.h1.end()));
  double hi = std::max(*std::max_element(stats.h0.begin(), stats.h0.end()),
                       *std::max_element(stats.h1.begin(), stats.h1.end()));
  lo -= 1.0;
  // miss - false alarm is nondecreasing in the threshold.
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    const EmpiricalRates r = empirical_rates(stats, mid);
    if (r.p_md - r.p_fa >= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

std::vector<double> miss_at_false_alarm(const TrialStatistics& stats, const std::vector<double>& p_fa_grid) {
  std::vector<double> h0 = stats.h0;
  std::sort(h0.begin(), h0.end(), std::greater<>());
  const auto n = static_cast<double>(h0.size());
  std::vector<double> out;
  out.reserve(p_fa_grid.size());
  for (double p : p_fa_grid) {
    const auto allowed = static_cast<std::size_t>(std::floor(p * n));
    // At most `allowed` H0 statistics exceed the (allowed+1)-th largest.
    const double threshold = allowed < h0.size() ? h0[allowed] : -std::numeric_limits<double>::infinity();
    out.push_back(empirical_rates(TrialStatistics{{}, stats.h1}, threshold).p_md);
  }
  return out;
}

std::vector<ResultRow> run_genie_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  for (const auto& d : cfg.detectors) {
    if (d.kind != DetectorKind::genie) throw InvalidConfiguration("genie experiment requires detector = genie");
  }
  const DetectorSpec genie{};
  std::vector<ResultRow> rows;
  for (int k : cfg.k_values) {
    for (double delta : cfg.delta_aod_deg) {
      const auto start = std::chrono::steady_clock::now();
      const Scenario scenario = make_scenario(cfg, delta);
      const double noise = system_for(cfg, k).estimation_noise();
      const DiscriminationPair pair = discrimination(scenario.c0, scenario.c1, noise);
      const TrialStatistics stats = collect_statistics(cfg, scenario, genie, k, cfg.trials, kMeasuredStream);

      std::vector<double> thresholds;
      if (std::holds_alternative<EqualErrorThreshold>(cfg.threshold)) {
        thresholds.push_back(calibrate_equal_error_threshold(pair, k));
      } else if (const auto* e = std::get_if<ExplicitThreshold>(&cfg.threshold)) {
        thresholds.push_back(e->value);
      } else {
        thresholds = sweep_thresholds(std::get<ThresholdSweep>(cfg.threshold), stats);
      }
      const double elapsed = seconds_since(start);
      for (double theta : thresholds) {
        const EmpiricalRates emp = empirical_rates(stats, theta);
        const ErrorProbabilities exact = error_probabilities(pair, k, theta);
        rows.push_back(ResultRow{genie.label(), k, delta, theta, emp.p_fa, emp.p_md, exact.false_alarm,
                                 exact.missed_detection, cfg.trials, elapsed});
      }
    }
  }
  sort_rows(rows);
  return rows;
}

std::vector<ResultRow> run_roc_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto* sweep = std::get_if<ThresholdSweep>(&cfg.threshold);
  if (!sweep) throw InvalidConfiguration("roc experiment requires threshold = sweep:...");
  std::vector<ResultRow> rows;
  for (int k : cfg.k_values) {
    for (double delta : cfg.delta_aod_deg) {
      const auto start = std::chrono::steady_clock::now();
      const Scenario scenario = make_scenario(cfg, delta);
      const double noise = system_for(cfg, k).estimation_noise();
      const auto stats = collect_statistics(cfg, scenario, cfg.detectors, k, cfg.trials, kMeasuredStream);
      const double elapsed = seconds_since(start);
      for (std::size_t d = 0; d < cfg.detectors.size(); ++d) {
        const bool genie = cfg.detectors[d].kind == DetectorKind::genie;
        std::optional<DiscriminationPair> pair;
        if (genie) pair = discrimination(scenario.c0, scenario.c1, noise);
        for (double theta : sweep_thresholds(*sweep, stats[d])) {
          const EmpiricalRates emp = empirical_rates(stats[d], theta);
          ResultRow row{cfg.detectors[d].label(), k, delta, theta, emp.p_fa, emp.p_md, std::nullopt, std::nullopt,
                        cfg.trials, elapsed};
          if (pair) {
            const ErrorProbabilities exact = error_probabilities(*pair, k, theta);
            row.p_fa_analytic = exact.false_alarm;
            row.p_md_analytic = exact.missed_detection;
          }
          rows.push_back(std::move(row));
        }
      }
    }
  }
  sort_rows(rows);
  return rows;
}

void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.detector, a.k, a.delta_aod_deg, a.threshold) <
           std::tie(b.detector, b.k, b.delta_aod_deg, b.threshold);
  });
}

}  // namespace covdetect::harness
