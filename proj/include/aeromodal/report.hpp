#ifndef AEROMODAL_REPORT_HPP
#define AEROMODAL_REPORT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace aeromodal {

struct ReportMode {
  double scaled_freq = 0.0;   // 2 f dt
  double damping_ratio = 0.0;
  double growth_rate = 0.0;
  double amplitude = 0.0;     // |b| after polishing
  bool is_static = false;
  std::string flags;          // ';'-separated markers, e.g. "static", "growing"
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

// Deduplicated modal table, ascending in frequency, one entry per conjugate
// pair. Wall-clock fields are diagnostics: they are never serialized, so that
// reports from identical (input, config, seed) are byte-identical.
struct ModeReport {
  std::string test_point_id;
  std::vector<ReportMode> modes;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string measurement_kind; // empty for full-sensor runs
  Eigen::Index measurement_p = 0;
  double runtime_seconds = 0.0;
  std::vector<StageTiming> stage_timings;
};

enum class ReportFormat { Table, Csv, Json };

ReportFormat report_format_from_string(const std::string& name);

void emit_report(const ModeReport& report, ReportFormat format, std::ostream& out);
void emit_report(const ModeReport& report, ReportFormat format, const std::string& path);

ModeReport parse_report_json(std::istream& in);
ModeReport parse_report_csv(std::istream& in);
ModeReport load_report(const std::string& path);

// One line of a full-vs-limited style comparison; percent errors are relative
// to report `a`. Unmatched rows carry the "unmatched" flag.
struct ComparisonRow {
  int index_a = -1;
  int index_b = -1;
  double freq_a = 0.0, damp_a = 0.0;
  double freq_b = 0.0, damp_b = 0.0;
  double freq_err_pct = 0.0, damp_err_pct = 0.0;
  std::string flag;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  int matched = 0;
  int only_a = 0; // modes of a with no counterpart in b
  int only_b = 0; // extra modes of b
};

// Greedy nearest-frequency matching within a relative tolerance.
ComparisonTable compare_reports(const ModeReport& a, const ModeReport& b, double freq_tol = 0.05);

void print_comparison(const ComparisonTable& table, std::ostream& out);
void save_comparison_csv(const ComparisonTable& table, std::ostream& out);

} // namespace aeromodal

#endif
