#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "covdetect/error_analysis.hpp"
#include "covdetect/harness/config.hpp"
#include "covdetect/harness/experiments.hpp"
#include "covdetect/harness/results.hpp"
#include "oracles.hpp"

using namespace covdetect;
using namespace covdetect::harness;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg = default_config();
  cfg.system.antennas = 8;
  cfg.system.pilot_length = 8;
  cfg.k_values = {5, 10, 20};
  cfg.delta_aod_deg = {0.5, 1.0};
  cfg.trials = 4000;
  return cfg;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "covdetect_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

ExperimentConfig parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace

TEST(Config, DefaultsMirrorReferenceScenario) {
  const ExperimentConfig cfg = default_config();
  EXPECT_EQ(cfg.system.antennas, 32);
  EXPECT_EQ(cfg.system.pilot_length, 32);
  EXPECT_NEAR(cfg.system.snr_db(), 0.0, 1e-12);
  EXPECT_NEAR(cfg.ring.spread_rad, 20.0 * std::numbers::pi / 180.0, 1e-15);
  EXPECT_DOUBLE_EQ(cfg.ring.wavelength_m, 3.76e-3);
  EXPECT_DOUBLE_EQ(cfg.ring.spacing_factor * cfg.ring.wavelength_m, 7.52e-3);
  EXPECT_DOUBLE_EQ(cfg.carrier_frequency_hz, 80e9);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, TextRoundTrip) {
  ExperimentConfig cfg = small_config();
  cfg.threshold = ThresholdSweep{-3.5, 7.25, 11};
  cfg.detectors = {DetectorSpec{DetectorKind::ml, MlEstimatorConfig{0.25, 3.0}},
                   DetectorSpec{DetectorKind::ml, MlEstimatorConfig{0.25, 6.0}},
                   DetectorSpec{DetectorKind::shrinkage, {}}};
  cfg.seed = 0xfeedfacecafebeefULL;
  cfg.target_error = 0.01;
  cfg.change_frame = 7;
  cfg.link = Link::uplink;
  const ExperimentConfig back = parse_text(to_config_text(cfg));
  EXPECT_EQ(to_config_text(back), to_config_text(cfg));
  EXPECT_EQ(back.seed, cfg.seed);
  ASSERT_EQ(back.detectors.size(), 3u);
  EXPECT_EQ(back.detectors[1].label(), "ml:kappa=6:beta=0.25");
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW((void)parse_text("colour = blue\n"), InvalidConfiguration);
  EXPECT_THROW((void)parse_text("trials = 10\ntrials = 20\n"), InvalidConfiguration);
  EXPECT_THROW((void)parse_text("trials = ten\n"), InvalidConfiguration);
  EXPECT_THROW((void)parse_text("trials = 0\n"), InvalidConfiguration);
  EXPECT_THROW((void)parse_text("k_values =\n"), InvalidConfiguration);
  EXPECT_THROW((void)parse_text("threshold = sweep:auto:1\n"), InvalidConfiguration);
  EXPECT_THROW((void)parse_text("detector = oracle\n"), InvalidConfiguration);
  EXPECT_THROW((void)parse_text("target_error = 0.001\ntrials = 100\n"), InvalidConfiguration);
  EXPECT_THROW((void)load_config(scratch("does_not_exist.cfg").string()), IoError);
}

TEST(Config, CommentsAndBlankLines) {
  const ExperimentConfig cfg = parse_text("# a comment\n\nantennas = 4   # inline\npilot_length = 4\n");
  EXPECT_EQ(cfg.system.antennas, 4);
}

TEST(Results, HeaderAndEmptyAnalyticCells) {
  ResultRow genie{"genie", 5, 0.5, 1.25, 0.1, 0.2, 0.11, 0.19, 100, 0.5};
  ResultRow ml{"ml:kappa=4", 5, 0.5, 1.25, 0.1, 0.2, std::nullopt, std::nullopt, 100, 0.5};
  std::ostringstream out;
  write_results_csv(out, {genie});
  std::istringstream lines(out.str());
  std::string header, row, extra;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_FALSE(std::getline(lines, extra));
  EXPECT_EQ(header, "detector,K,delta_aod_deg,threshold,p_fa_emp,p_md_emp,p_fa_analytic,p_md_analytic,trials,wall_time_s");
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 9);

  std::ostringstream out2;
  write_results_csv(out2, {ml});
  EXPECT_NE(out2.str().find("0.2,,,100"), std::string::npos);
}

TEST(Results, EmitWritesCsvAndManifest) {
  const auto path = scratch("emit.csv");
  ExperimentConfig cfg = small_config();
  cfg.seed = 4242;
  emit_results({ResultRow{"genie", 5, 1.0, 0.0, 0.1, 0.1, 0.1, 0.1, 10, 0.0}}, path.string(), cfg);
  std::ifstream csv(path);
  std::stringstream buf;
  buf << csv.rdbuf();
  EXPECT_EQ(parse_results_csv(buf).size(), 1u);
  std::ifstream manifest(path.string() + ".manifest");
  std::string text((std::istreambuf_iterator<char>(manifest)), std::istreambuf_iterator<char>());
  EXPECT_NE(text.find("version = 1.0.0"), std::string::npos);
  EXPECT_NE(text.find("seed = 4242"), std::string::npos);
}

TEST(Results, EmitErrors) {
  EXPECT_THROW(emit_results({}, scratch("empty.csv").string(), small_config()), InvalidConfiguration);
  EXPECT_THROW(emit_results({ResultRow{}}, "/nonexistent-dir/x/y.csv", small_config()), IoError);
}

TEST(Results, ParseRejectsMalformed) {
  std::istringstream bad_header("detector,K\n");
  EXPECT_THROW((void)parse_results_csv(bad_header), IoError);
  std::istringstream bad_row(std::string(kResultsHeader) + "\ngenie,5,x,1,0,0,,,1,0\n");
  EXPECT_THROW((void)parse_results_csv(bad_row), IoError);
}

TEST(Experiments, DegenerateScenarioIsConfigurationError) {
  ExperimentConfig cfg = small_config();
  cfg.delta_aod_deg = {0.0};
  EXPECT_THROW((void)run_genie_experiment(cfg), DegenerateHypotheses);
}

TEST(Experiments, GenieEmpiricalMatchesAnalyticAndTrends) {
  const ExperimentConfig cfg = small_config();
  const auto rows = run_genie_experiment(cfg);
  ASSERT_EQ(rows.size(), 6u);
  std::map<std::pair<double, int>, double> err;
  for (const auto& r : rows) {
    ASSERT_TRUE(r.p_fa_analytic && r.p_md_analytic);
    EXPECT_NEAR(r.p_fa_emp, *r.p_fa_analytic, 3.0 * oracle::binomial_se(*r.p_fa_analytic, r.trials));
    EXPECT_NEAR(r.p_md_emp, *r.p_md_analytic, 3.0 * oracle::binomial_se(*r.p_md_analytic, r.trials));
    EXPECT_NEAR(*r.p_fa_analytic, *r.p_md_analytic, 1e-4);
    err[{r.delta_aod_deg, r.k}] = 0.5 * (r.p_fa_emp + r.p_md_emp);
  }
  for (double d : cfg.delta_aod_deg) {
    EXPECT_GT(err[std::pair(d, 5)], err[std::pair(d, 10)]);
    EXPECT_GE(err[std::pair(d, 10)], err[std::pair(d, 20)]);
  }
  for (int k : cfg.k_values) EXPECT_LE(err[std::pair(1.0, k)], err[std::pair(0.5, k)]);
}

TEST(Experiments, ExplicitThresholdIsUsed) {
  ExperimentConfig cfg = small_config();
  cfg.k_values = {5};
  cfg.delta_aod_deg = {1.0};
  cfg.trials = 200;
  cfg.threshold = ExplicitThreshold{-0.5};
  const auto rows = run_genie_experiment(cfg);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].threshold, -0.5);
}

TEST(Experiments, RocSweepEndpointsAndMonotone) {
  ExperimentConfig cfg = small_config();
  cfg.k_values = {10};
  cfg.delta_aod_deg = {1.0};
  cfg.trials = 2000;
  cfg.threshold = ThresholdSweep{std::nullopt, std::nullopt, 12};
  cfg.detectors = {DetectorSpec{DetectorKind::ml, {}}, DetectorSpec{DetectorKind::shrinkage, {}}};
  const auto rows = run_roc_experiment(cfg);
  ASSERT_EQ(rows.size(), 24u);
  for (const std::string label : {"ml:kappa=4", "shrinkage"}) {
    std::vector<ResultRow> curve;
    std::copy_if(rows.begin(), rows.end(), std::back_inserter(curve),
                 [&](const ResultRow& r) { return r.detector == label; });
    ASSERT_EQ(curve.size(), 12u);
    EXPECT_GT(curve.front().p_fa_emp, 0.99);
    EXPECT_LT(curve.front().p_md_emp, 0.01);
    EXPECT_LT(curve.back().p_fa_emp, 0.01);
    EXPECT_GT(curve.back().p_md_emp, 0.99);
    for (std::size_t i = 1; i < curve.size(); ++i) {
      EXPECT_GT(curve[i].threshold, curve[i - 1].threshold);
      EXPECT_LE(curve[i].p_fa_emp, curve[i - 1].p_fa_emp);
      EXPECT_GE(curve[i].p_md_emp, curve[i - 1].p_md_emp);
      EXPECT_FALSE(curve[i].p_fa_analytic.has_value());
    }
  }
}

// Reference scenario (M = 32, K = 30, dAoD = 0.75 deg): the tighter condition
// bound kappa = 3 does no worse than kappa = 6 at matched false-alarm levels.
TEST(Experiments, TighterKappaNoWorseAtReferenceScenario) {
  ExperimentConfig cfg = default_config();
  cfg.k_values = {30};
  cfg.delta_aod_deg = {0.75};
  cfg.trials = 4000;
  cfg.seed = 388;
  cfg.detectors = {DetectorSpec{DetectorKind::ml, MlEstimatorConfig{std::nullopt, 3.0}},
                   DetectorSpec{DetectorKind::ml, MlEstimatorConfig{std::nullopt, 6.0}}};
  const Scenario sc = make_scenario(cfg, 0.75);
  const auto stats = collect_statistics(cfg, sc, cfg.detectors, 30, cfg.trials, 0);
  const std::vector<double> grid{0.01, 0.02, 0.05, 0.1, 0.2, 0.3};
  const auto tight = miss_at_false_alarm(stats[0], grid);
  const auto loose = miss_at_false_alarm(stats[1], grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double se = std::hypot(oracle::binomial_se(tight[i], cfg.trials), oracle::binomial_se(loose[i], cfg.trials));
    EXPECT_LE(tight[i], loose[i] + 2.0 * se) << "P_FA <= " << grid[i];
  }
}

TEST(Experiments, RocNeedsSweep) {
  ExperimentConfig cfg = small_config();
  cfg.detectors = {DetectorSpec{DetectorKind::ml, {}}};
  EXPECT_THROW((void)run_roc_experiment(cfg), InvalidConfiguration);
}

TEST(Experiments, EmpiricalHelpers) {
  TrialStatistics stats{{0.0, 1.0, 2.0, 3.0}, {2.0, 3.0, 4.0, 5.0}};
  const auto at2 = empirical_rates(stats, 2.0);
  EXPECT_DOUBLE_EQ(at2.p_fa, 0.25);
  EXPECT_DOUBLE_EQ(at2.p_md, 0.25);
  const double t = empirical_equal_error_threshold(stats);
  const auto eq = empirical_rates(stats, t);
  EXPECT_DOUBLE_EQ(eq.p_fa, eq.p_md);
  const auto miss = miss_at_false_alarm(stats, {0.0, 0.25, 0.5});
  ASSERT_EQ(miss.size(), 3u);
  EXPECT_DOUBLE_EQ(miss[0], 0.5);
  EXPECT_DOUBLE_EQ(miss[1], 0.25);
  EXPECT_DOUBLE_EQ(miss[2], 0.0);
}

TEST(Frames, NoChangeStaysQuiet) {
  ExperimentConfig cfg = small_config();
  cfg.k_values = {20};
  cfg.delta_aod_deg = {1.0};
  const int frames = 300;
  const auto log = simulate_frames(cfg, frames, std::nullopt);
  ASSERT_EQ(static_cast<int>(log.size()), frames);
  const auto pair = discrimination(make_scenario(cfg, 1.0).c0, make_scenario(cfg, 1.0).c1,
                                   cfg.system.estimation_noise());
  const double p_fa = error_probabilities(pair, 20, log.front().threshold).false_alarm;
  const double quiet = std::count_if(log.begin(), log.end(), [](const FrameRecord& r) {
                         return r.decision == Hypothesis::h0;
                       }) / static_cast<double>(frames);
  EXPECT_GE(quiet, 1.0 - p_fa - 3.0 * oracle::binomial_se(p_fa, frames));
}

TEST(Frames, ChangeIsFlaggedAndReferenceUpdated) {
  ExperimentConfig cfg = small_config();
  cfg.k_values = {20};
  cfg.delta_aod_deg = {1.0};
  int flagged = 0;
  const int runs = 200;
  double p_md = 0.0;
  for (int r = 0; r < runs; ++r) {
    cfg.seed = 1000 + r;
    const auto log = simulate_frames(cfg, 6, 4);
    EXPECT_TRUE(log[3].changed);
    if (r == 0) {
      const Scenario sc = make_scenario(cfg, 1.0);
      p_md = error_probabilities(discrimination(sc.c0, sc.c1, cfg.system.estimation_noise()), 20,
                                 log[0].threshold).missed_detection;
    }
    if (log[3].decision == Hypothesis::h1) {
      ++flagged;
      EXPECT_TRUE(log[3].reference_updated);
    }
  }
  EXPECT_GE(flagged / static_cast<double>(runs), 1.0 - p_md - 3.0 * oracle::binomial_se(p_md, runs));
}

TEST(Frames, EstimatedDetectorsRun) {
  ExperimentConfig cfg = small_config();
  cfg.k_values = {20};
  cfg.delta_aod_deg = {1.0};
  cfg.trials = 500;
  for (DetectorKind kind : {DetectorKind::ml, DetectorKind::shrinkage}) {
    cfg.detectors = {DetectorSpec{kind, {}}};
    const auto log = simulate_frames(cfg, 8, 3);
    ASSERT_EQ(log.size(), 8u);
    EXPECT_EQ(log[2].decision, Hypothesis::h1);
  }
}

TEST(Frames, InvalidArguments) {
  ExperimentConfig cfg = small_config();
  EXPECT_THROW((void)simulate_frames(cfg, 5, 6), InvalidConfiguration);
  EXPECT_THROW((void)simulate_frames(cfg, 5, 0), InvalidConfiguration);
  cfg.delta_aod_deg = {0.0};
  EXPECT_THROW((void)simulate_frames(cfg, 5, 1), InvalidConfiguration);
  cfg.delta_aod_deg = {1.0};
  cfg.threshold = ThresholdSweep{};
  EXPECT_THROW((void)simulate_frames(cfg, 5, 1), InvalidConfiguration);
}
