// covdetect: simulation driver for covariance change detection.
//
//   covdetect covgen --config run.cfg --delta-aod-deg 0.5 --out c1.csv
//   covdetect genie  --config run.cfg --trials 100000 --out genie.csv
//   covdetect roc    --config run.cfg --out roc.csv
//   covdetect frames --config run.cfg --frames 40 --change-frame 12 --out frames.csv
//
// Exit codes: 0 success, 1 I/O or unexpected failure, 2 invalid
// configuration, 3 numerical-domain error.

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include "covdetect/channel_model.hpp"
#include "covdetect/harness/config.hpp"
#include "covdetect/harness/experiments.hpp"
#include "covdetect/harness/results.hpp"

namespace {

using namespace covdetect;
using namespace covdetect::harness;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> out;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Experiment config file (key = value); defaults apply if omitted")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts.seed, "Override the config seed");
  cmd->add_option("--trials", opts.trials, "Override the Monte Carlo trial count");
  cmd->add_option("--out", opts.out, "Output path (overrides the config output)");
  cmd->add_option("--threads", opts.threads, "Worker threads");
}

ExperimentConfig resolve(const CommonOptions& opts) {
  ExperimentConfig cfg = opts.config_path.empty() ? default_config() : load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.trials) cfg.trials = *opts.trials;
  if (opts.out) cfg.output_path = *opts.out;
  if (opts.threads) cfg.threads = *opts.threads;
  cfg.validate();
  return cfg;
}

int run_covgen(const CommonOptions& opts, double delta_deg) {
  ExperimentConfig cfg = resolve(opts);
  OneRingParams ring = cfg.ring;
  ring.aod_rad += delta_deg * std::numbers::pi / 180.0;
  const CMatrix cov = one_ring_covariance(ring, cfg.system.antennas);
  write_covariance_csv(cov, cfg.output_path);
  std::cerr << "wrote " << cov.rows() << "x" << cov.cols() << " covariance to " << cfg.output_path << '\n';
  return 0;
}

int run_genie(const CommonOptions& opts) {
  const ExperimentConfig cfg = resolve(opts);
  auto rows = run_genie_experiment(cfg);
  const auto n = rows.size();
  emit_results(std::move(rows), cfg.output_path, cfg);
  std::cerr << "wrote " << n << " rows to " << cfg.output_path << '\n';
  return 0;
}

int run_roc(const CommonOptions& opts) {
  const ExperimentConfig cfg = resolve(opts);
  auto rows = run_roc_experiment(cfg);
  const auto n = rows.size();
  emit_results(std::move(rows), cfg.output_path, cfg);
  std::cerr << "wrote " << n << " rows to " << cfg.output_path << '\n';
  return 0;
}

int run_frames(const CommonOptions& opts, std::optional<int> frames, std::optional<int> change_frame) {
  ExperimentConfig cfg = resolve(opts);
  if (frames) cfg.num_frames = *frames;
  if (change_frame) cfg.change_frame = *change_frame;
  const auto log = simulate_frames(cfg, cfg.num_frames, cfg.change_frame);
  write_frames_csv(log, cfg.output_path);
  int flagged = 0;
  for (const auto& rec : log) flagged += rec.decision == Hypothesis::h1;
  std::cerr << "wrote " << log.size() << " frames (" << flagged << " flagged) to " << cfg.output_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covariance change detection experiments"};
  app.require_subcommand(1);

  CommonOptions opts;
  double delta_deg = 0.0;
  std::optional<int> frames;
  std::optional<int> change_frame;

  auto* covgen = app.add_subcommand("covgen", "Write a one-ring covariance as row,col,re,im CSV");
  add_common(covgen, opts);
  covgen->add_option("--delta-aod-deg", delta_deg, "Offset added to the configured AoD in degrees");

  auto* genie = app.add_subcommand("genie", "Known-C1 detector: empirical vs analytic error rates");
  add_common(genie, opts);

  auto* roc = app.add_subcommand("roc", "Threshold sweep for the estimated-C1 detectors");
  add_common(roc, opts);

  auto* frames_cmd = app.add_subcommand("frames", "Frame-by-frame detection with reference updates");
  add_common(frames_cmd, opts);
  frames_cmd->add_option("--frames", frames, "Number of frames (overrides num_frames)");
  frames_cmd->add_option("--change-frame", change_frame, "1-based frame at which the covariance changes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*covgen) return run_covgen(opts, delta_deg);
    if (*genie) return run_genie(opts);
    if (*roc) return run_roc(opts);
    if (*frames_cmd) return run_frames(opts, frames, change_frame);
  } catch (const InvalidConfiguration& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalDomainError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
