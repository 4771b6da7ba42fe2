#include "covdetect/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace covdetect::harness {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw InvalidConfiguration("config: '" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
  Int v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw InvalidConfiguration("config: '" + key + "' expects an integer, got '" + text + "'");
  }
  return v;
}

ThresholdPolicy parse_threshold(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() == 1 && parts[0] == "equal-error") return EqualErrorThreshold{};
  if (parts.size() == 2 && parts[0] == "explicit") return ExplicitThreshold{parse_double("threshold", parts[1])};
  if (parts.size() == 3 && parts[0] == "sweep" && parts[1] == "auto") {
    return ThresholdSweep{std::nullopt, std::nullopt, parse_int<int>("threshold", parts[2])};
  }
  if (parts.size() == 4 && parts[0] == "sweep") {
    return ThresholdSweep{parse_double("threshold", parts[1]), parse_double("threshold", parts[2]),
                          parse_int<int>("threshold", parts[3])};
  }
  throw InvalidConfiguration("config: threshold must be equal-error, explicit:<value>, sweep:auto:<count> or "
                             "sweep:<lo>:<hi>:<count>, got '" + text + "'");
}

}  // namespace

std::string DetectorSpec::label() const {
  switch (kind) {
    case DetectorKind::genie:
      return "genie";
    case DetectorKind::shrinkage:
      return "shrinkage";
    case DetectorKind::ml: {
      std::string s = "ml:kappa=" + fmt(ml.kappa);
      if (ml.beta) s += ":beta=" + fmt(*ml.beta);
      return s;
    }
  }
  return "unknown";
}

std::string threshold_text(const ThresholdPolicy& policy) {
  struct Visitor {
    std::string operator()(const EqualErrorThreshold&) const { return "equal-error"; }
    std::string operator()(const ExplicitThreshold& t) const { return "explicit:" + fmt(t.value); }
    std::string operator()(const ThresholdSweep& t) const {
      if (!t.lo || !t.hi) return "sweep:auto:" + std::to_string(t.count);
      return "sweep:" + fmt(*t.lo) + ":" + fmt(*t.hi) + ":" + std::to_string(t.count);
    }
  };
  return std::visit(Visitor{}, policy);
}

void ExperimentConfig::validate() const {
  if (k_values.empty()) throw InvalidConfiguration("config: k_values must not be empty");
  if (delta_aod_deg.empty()) throw InvalidConfiguration("config: delta_aod_deg must not be empty");
  if (detectors.empty()) throw InvalidConfiguration("config: at least one detector is required");
  if (trials < 1) throw InvalidConfiguration("config: trials must be >= 1");
  if (threads < 1) throw InvalidConfiguration("config: threads must be >= 1");
  if (num_frames < 1) throw InvalidConfiguration("config: num_frames must be >= 1");
  if (change_frame && (*change_frame < 1 || *change_frame > num_frames)) {
    throw InvalidConfiguration("config: change_frame must lie in [1, num_frames]");
  }
  for (int k : k_values) {
    if (k < 1) throw InvalidConfiguration("config: every K must be >= 1");
  }
  SystemParams sys = system;
  sys.detection_blocks = *std::max_element(k_values.begin(), k_values.end());
  sys.validate();
  ring.validate();
  if (link == Link::downlink && system.pilot_length < system.antennas) {
    throw InvalidConfiguration("config: downlink needs pilot_length >= antennas");
  }
  if (const auto* sweep = std::get_if<ThresholdSweep>(&threshold)) {
    if (sweep->count < 2) throw InvalidConfiguration("config: sweep count must be >= 2");
    if (sweep->lo && sweep->hi && !(*sweep->lo < *sweep->hi)) {
      throw InvalidConfiguration("config: sweep range must satisfy lo < hi");
    }
  }
  for (const auto& d : detectors) {
    if (d.kind == DetectorKind::ml) d.ml.validate();
    if (d.kind == DetectorKind::shrinkage &&
        *std::min_element(k_values.begin(), k_values.end()) < 2) {
      throw InvalidConfiguration("config: the shrinkage detector needs K >= 2");
    }
  }
  if (target_error) {
    if (!(*target_error > 0.0 && *target_error < 1.0)) {
      throw InvalidConfiguration("config: target_error must lie in (0, 1)");
    }
    const double needed = 25.0 / *target_error;
    if (trials < needed) {
      throw InvalidConfiguration("config: trials must be >= 25 / target_error = " + fmt(std::ceil(needed)));
    }
  }
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.system.antennas = 32;
  cfg.system.pilot_length = 32;
  cfg.system.frame_blocks = 100;
  cfg.system.power = 1.0;
  cfg.system.noise_variance = 1.0;
  cfg.ring.aod_rad = 30.0 * kDeg;
  cfg.ring.spread_rad = 20.0 * kDeg;
  cfg.ring.wavelength_m = 3.76e-3;
  cfg.ring.spacing_factor = 2.0;
  cfg.ring.quadrature_points = 2048;
  return cfg;
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg = default_config();
  std::map<std::string, std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw InvalidConfiguration("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (!seen.emplace(key, value).second) {
      throw InvalidConfiguration("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }

  std::vector<DetectorKind> kinds{DetectorKind::genie};
  std::vector<double> kappas{4.0};
  std::optional<double> beta;
  std::optional<double> snr_db;
  bool noise_given = false;

  for (const auto& [key, value] : seen) {
    if (key == "antennas") {
      cfg.system.antennas = parse_int<int>(key, value);
    } else if (key == "pilot_length") {
      cfg.system.pilot_length = parse_int<int>(key, value);
    } else if (key == "frame_blocks") {
      cfg.system.frame_blocks = parse_int<int>(key, value);
    } else if (key == "power") {
      cfg.system.power = parse_double(key, value);
    } else if (key == "noise_variance") {
      cfg.system.noise_variance = parse_double(key, value);
      noise_given = true;
    } else if (key == "snr_db") {
      snr_db = parse_double(key, value);
    } else if (key == "link") {
      if (value == "uplink") {
        cfg.link = Link::uplink;
      } else if (value == "downlink") {
        cfg.link = Link::downlink;
      } else {
        throw InvalidConfiguration("config: link must be uplink or downlink");
      }
    } else if (key == "aod_deg") {
      cfg.ring.aod_rad = parse_double(key, value) * kDeg;
    } else if (key == "spread_deg") {
      cfg.ring.spread_rad = parse_double(key, value) * kDeg;
    } else if (key == "wavelength_m") {
      cfg.ring.wavelength_m = parse_double(key, value);
    } else if (key == "spacing_factor") {
      cfg.ring.spacing_factor = parse_double(key, value);
    } else if (key == "quadrature_points") {
      cfg.ring.quadrature_points = parse_int<int>(key, value);
    } else if (key == "carrier_frequency_hz") {
      cfg.carrier_frequency_hz = parse_double(key, value);
    } else if (key == "delta_aod_deg") {
      cfg.delta_aod_deg.clear();
      for (const auto& item : split(value, ',')) cfg.delta_aod_deg.push_back(parse_double(key, item));
    } else if (key == "k_values") {
      cfg.k_values.clear();
      for (const auto& item : split(value, ',')) cfg.k_values.push_back(parse_int<int>(key, item));
    } else if (key == "trials") {
      cfg.trials = parse_int<int>(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_int<std::uint64_t>(key, value);
    } else if (key == "threshold") {
      cfg.threshold = parse_threshold(value);
    } else if (key == "detector") {
      kinds.clear();
      for (const auto& item : split(value, ',')) {
        if (item == "genie") {
          kinds.push_back(DetectorKind::genie);
        } else if (item == "ml") {
          kinds.push_back(DetectorKind::ml);
        } else if (item == "shrinkage") {
          kinds.push_back(DetectorKind::shrinkage);
        } else {
          throw InvalidConfiguration("config: unknown detector '" + item + "'");
        }
      }
    } else if (key == "kappa") {
      kappas.clear();
      for (const auto& item : split(value, ',')) kappas.push_back(parse_double(key, item));
    } else if (key == "beta") {
      if (value != "auto") beta = parse_double(key, value);
    } else if (key == "output") {
      cfg.output_path = value;
    } else if (key == "threads") {
      cfg.threads = parse_int<int>(key, value);
    } else if (key == "target_error") {
      if (value != "none") cfg.target_error = parse_double(key, value);
    } else if (key == "num_frames") {
      cfg.num_frames = parse_int<int>(key, value);
    } else if (key == "change_frame") {
      if (value != "none") cfg.change_frame = parse_int<int>(key, value);
    } else {
      throw InvalidConfiguration("config: unknown key '" + key + "'");
    }
  }

  if (snr_db) {
    const double implied = cfg.system.power / std::pow(10.0, *snr_db / 10.0);
    if (noise_given) {
      if (std::abs(cfg.system.snr_db() - *snr_db) > 1e-9) {
        throw InvalidConfiguration("config: snr_db disagrees with power / noise_variance");
      }
    } else {
      cfg.system.noise_variance = implied;
    }
  }

  cfg.detectors.clear();
  for (DetectorKind kind : kinds) {
    if (kind != DetectorKind::ml) {
      cfg.detectors.push_back(DetectorSpec{kind, {}});
      continue;
    }
    for (double kappa : kappas) cfg.detectors.push_back(DetectorSpec{kind, MlEstimatorConfig{beta, kappa}});
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string to_config_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto join = [](const auto& values, auto&& to_text) {
    std::string s;
    for (const auto& v : values) {
      if (!s.empty()) s += ", ";
      s += to_text(v);
    }
    return s;
  };

  std::vector<std::string> kinds;
  std::vector<double> kappas;
  std::optional<double> beta;
  for (const auto& d : cfg.detectors) {
    const std::string name = d.kind == DetectorKind::genie ? "genie" : d.kind == DetectorKind::ml ? "ml" : "shrinkage";
    if (std::find(kinds.begin(), kinds.end(), name) == kinds.end()) kinds.push_back(name);
    if (d.kind == DetectorKind::ml) {
      kappas.push_back(d.ml.kappa);
      beta = d.ml.beta;
    }
  }

  out << "antennas = " << cfg.system.antennas << '\n'
      << "pilot_length = " << cfg.system.pilot_length << '\n'
      << "frame_blocks = " << cfg.system.frame_blocks << '\n'
      << "power = " << fmt(cfg.system.power) << '\n'
      << "noise_variance = " << fmt(cfg.system.noise_variance) << '\n'
      << "link = " << (cfg.link == Link::uplink ? "uplink" : "downlink") << '\n'
      << "aod_deg = " << fmt(cfg.ring.aod_rad / kDeg) << '\n'
      << "spread_deg = " << fmt(cfg.ring.spread_rad / kDeg) << '\n'
      << "wavelength_m = " << fmt(cfg.ring.wavelength_m) << '\n'
      << "spacing_factor = " << fmt(cfg.ring.spacing_factor) << '\n'
      << "quadrature_points = " << cfg.ring.quadrature_points << '\n'
      << "carrier_frequency_hz = " << fmt(cfg.carrier_frequency_hz) << '\n'
      << "delta_aod_deg = " << join(cfg.delta_aod_deg, fmt) << '\n'
      << "k_values = " << join(cfg.k_values, [](int k) { return std::to_string(k); }) << '\n'
      << "trials = " << cfg.trials << '\n'
      << "seed = " << cfg.seed << '\n'
      << "threshold = " << threshold_text(cfg.threshold) << '\n'
      << "detector = " << join(kinds, [](const std::string& s) { return s; }) << '\n';
  if (!kappas.empty()) {
    out << "kappa = " << join(kappas, fmt) << '\n' << "beta = " << (beta ? fmt(*beta) : "auto") << '\n';
  }
  out << "output = " << cfg.output_path << '\n'
      << "threads = " << cfg.threads << '\n'
      << "target_error = " << (cfg.target_error ? fmt(*cfg.target_error) : "none") << '\n'
      << "num_frames = " << cfg.num_frames << '\n'
      << "change_frame = " << (cfg.change_frame ? std::to_string(*cfg.change_frame) : "none") << '\n';
  return out.str();
}

}  // namespace covdetect::harness
