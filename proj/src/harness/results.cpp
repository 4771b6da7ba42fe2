#include "covdetect/harness/results.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace covdetect::harness {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

template <typename T>
T parse_number(const std::string& text, int line_no) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw IoError("results csv line " + std::to_string(line_no) + ": bad number '" + text + "'");
  }
  return value;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw IoError("cannot format number");
  return std::string(buf, ptr);
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    out << r.detector << ',' << r.k << ',' << format_double(r.delta_aod_deg) << ',' << format_double(r.threshold)
        << ',' << format_double(r.p_fa_emp) << ',' << format_double(r.p_md_emp) << ','
        << (r.p_fa_analytic ? format_double(*r.p_fa_analytic) : "") << ','
        << (r.p_md_analytic ? format_double(*r.p_md_analytic) : "") << ',' << r.trials << ','
        << format_double(r.wall_time_s) << '\n';
  }
}

std::vector<ResultRow> parse_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) throw IoError("results csv: missing or unexpected header");
  std::vector<ResultRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 10) throw IoError("results csv line " + std::to_string(line_no) + ": expected 10 fields");
    ResultRow r;
    r.detector = c[0];
    r.k = parse_number<int>(c[1], line_no);
    r.delta_aod_deg = parse_number<double>(c[2], line_no);
    r.threshold = parse_number<double>(c[3], line_no);
    r.p_fa_emp = parse_number<double>(c[4], line_no);
    r.p_md_emp = parse_number<double>(c[5], line_no);
    if (!c[6].empty()) r.p_fa_analytic = parse_number<double>(c[6], line_no);
    if (!c[7].empty()) r.p_md_analytic = parse_number<double>(c[7], line_no);
    r.trials = parse_number<int>(c[8], line_no);
    r.wall_time_s = parse_number<double>(c[9], line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

void emit_results(std::vector<ResultRow> rows, const std::string& path, const ExperimentConfig& cfg) {
  if (rows.empty()) throw InvalidConfiguration("no result rows to write");
  sort_rows(rows);

  auto out = open_for_write(path);
  write_results_csv(out, rows);
  finish(out, path);

  const std::string manifest_path = path + ".manifest";
  auto manifest = open_for_write(manifest_path);
  manifest << "# covdetect run manifest\n"
           << "version = " << kArtifactVersion << '\n'
           << "rows = " << rows.size() << '\n'
           << to_config_text(cfg);
  finish(manifest, manifest_path);
}

void write_frames_csv(const std::vector<FrameRecord>& frames, const std::string& path) {
  auto out = open_for_write(path);
  out << "frame,changed,decision,statistic,threshold,reference_updated\n";
  for (const auto& f : frames) {
    out << f.frame << ',' << (f.changed ? 1 : 0) << ',' << to_string(f.decision) << ',' << format_double(f.statistic)
        << ',' << format_double(f.threshold) << ',' << (f.reference_updated ? 1 : 0) << '\n';
  }
  finish(out, path);
}

void write_covariance_csv(const CMatrix& cov, const std::string& path) {
  auto out = open_for_write(path);
  out << "row,col,re,im\n";
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    for (Eigen::Index j = 0; j < cov.cols(); ++j) {
      out << i << ',' << j << ',' << format_double(cov(i, j).real()) << ',' << format_double(cov(i, j).imag()) << '\n';
    }
  }
  finish(out, path);
}

}  // namespace covdetect::harness
