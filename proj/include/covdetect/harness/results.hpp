#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "covdetect/harness/config.hpp"
#include "covdetect/harness/experiments.hpp"

namespace covdetect::harness {

inline constexpr const char* kResultsHeader =
    "detector,K,delta_aod_deg,threshold,p_fa_emp,p_md_emp,p_fa_analytic,p_md_analytic,trials,wall_time_s";

/// Doubles are written in shortest round-trip form, so parsing the output
/// reproduces the rows bit for bit. Analytic cells are empty when absent.
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
[[nodiscard]] std::vector<ResultRow> parse_results_csv(std::istream& in);

/// Writes `path` and `path.manifest` (config echo, seed, version). Rows are
/// sorted first; an empty row set is rejected.
void emit_results(std::vector<ResultRow> rows, const std::string& path, const ExperimentConfig& cfg);

void write_frames_csv(const std::vector<FrameRecord>& frames, const std::string& path);

/// One line per entry: row,col,re,im.
void write_covariance_csv(const CMatrix& cov, const std::string& path);

[[nodiscard]] std::string format_double(double v);

}  // namespace covdetect::harness
