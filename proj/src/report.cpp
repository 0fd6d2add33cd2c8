#include "aeromodal/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "aeromodal/errors.hpp"

namespace aeromodal {

namespace {

using Json = nlohmann::ordered_json;

constexpr int k_schema_version = 1;

Json mode_to_json(const ReportMode& m) {
  Json j;
  j["scaled_freq"] = m.scaled_freq;
  j["damping_ratio"] = m.damping_ratio;
  j["growth_rate"] = m.growth_rate;
  j["amplitude"] = m.amplitude;
  j["is_static"] = m.is_static;
  j["flags"] = m.flags;
  return j;
}

Json report_to_json(const ModeReport& report) {
  Json j;
  j["schema_version"] = k_schema_version;
  j["test_point_id"] = report.test_point_id;
  Json modes = Json::array();
  for (const auto& m : report.modes) modes.push_back(mode_to_json(m));
  j["modes"] = std::move(modes);
  Json provenance;
  provenance["config_hash"] = report.config_hash;
  provenance["seed"] = report.seed;
  if (!report.measurement_kind.empty()) {
    Json measurement;
    measurement["kind"] = report.measurement_kind;
    measurement["p"] = report.measurement_p;
    provenance["measurement"] = std::move(measurement);
  } else {
    provenance["measurement"] = nullptr;
  }
  j["provenance"] = std::move(provenance);
  return j;
}

void emit_csv(const ModeReport& report, std::ostream& out) {
  out << "# test_point_id=" << report.test_point_id << '\n';
  out << "# config_hash=" << report.config_hash << '\n';
  out << "# seed=" << report.seed << '\n';
  if (!report.measurement_kind.empty())
    out << "# measurement=" << report.measurement_kind << ',' << report.measurement_p << '\n';
  out << "scaled_freq,damping_ratio,growth_rate,amplitude,is_static,flags\n";
  const auto num = [](double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
  };
  for (const auto& m : report.modes)
    out << num(m.scaled_freq) << ',' << num(m.damping_ratio) << ',' << num(m.growth_rate) << ','
        << num(m.amplitude) << ',' << (m.is_static ? 1 : 0) << ',' << m.flags << '\n';
}

void emit_table(const ModeReport& report, std::ostream& out) {
  out << "test point: " << report.test_point_id;
  if (!report.measurement_kind.empty())
    out << "  [limited sensors: " << report.measurement_kind << ", p=" << report.measurement_p
        << "]";
  out << '\n';
  out << "modes: " << report.modes.size() << "  config: " << report.config_hash
      << "  seed: " << report.seed << '\n';
  out << std::left << std::setw(4) << "#" << std::right << std::setw(12) << "freq(2fdt)"
      << std::setw(12) << "damping" << std::setw(14) << "growth" << std::setw(12) << "amplitude"
      << "  flags\n";
  int idx = 1;
  for (const auto& m : report.modes) {
    out << std::left << std::setw(4) << idx++ << std::right << std::fixed << std::setw(12)
        << std::setprecision(6) << m.scaled_freq << std::setw(12) << std::setprecision(4)
        << m.damping_ratio << std::setw(14) << std::scientific << std::setprecision(3)
        << m.growth_rate << std::setw(12) << std::fixed << std::setprecision(4) << m.amplitude
        << "  " << m.flags << '\n';
    out.unsetf(std::ios::floatfield);
  }
}

} // namespace

ReportFormat report_format_from_string(const std::string& name) {
  if (name == "table") return ReportFormat::Table;
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw ParseError("unknown report format '" + name + "'");
}

void emit_report(const ModeReport& report, ReportFormat format, std::ostream& out) {
  switch (format) {
    case ReportFormat::Json: out << report_to_json(report).dump(2) << '\n'; break;
    case ReportFormat::Csv: emit_csv(report, out); break;
    case ReportFormat::Table: emit_table(report, out); break;
  }
}

void emit_report(const ModeReport& report, ReportFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write report to '" + path + "'");
  emit_report(report, format, out);
}

ModeReport parse_report_json(std::istream& in) {
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid report JSON: ") + e.what());
  }
  ModeReport report;
  report.test_point_id = j.value("test_point_id", "");
  for (const auto& jm : j.at("modes")) {
    ReportMode m;
    m.scaled_freq = jm.at("scaled_freq").get<double>();
    m.damping_ratio = jm.at("damping_ratio").get<double>();
    m.growth_rate = jm.value("growth_rate", 0.0);
    m.amplitude = jm.value("amplitude", 0.0);
    m.is_static = jm.value("is_static", false);
    m.flags = jm.value("flags", "");
    report.modes.push_back(std::move(m));
  }
  if (j.contains("provenance")) {
    const auto& p = j["provenance"];
    report.config_hash = p.value("config_hash", "");
    report.seed = p.value("seed", std::uint64_t{0});
    if (p.contains("measurement") && !p["measurement"].is_null()) {
      report.measurement_kind = p["measurement"].value("kind", "");
      report.measurement_p = p["measurement"].value("p", Eigen::Index{0});
    }
  }
  return report;
}

ModeReport parse_report_csv(std::istream& in) {
  ModeReport report;
  std::string line;
  bool header_seen = false;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(2, eq - 2);
      std::string value = line.substr(eq + 1);
      if (key == "test_point_id") report.test_point_id = value;
      else if (key == "config_hash") report.config_hash = value;
      else if (key == "seed") report.seed = std::stoull(value);
      else if (key == "measurement") {
        const auto comma = value.find(',');
        report.measurement_kind = value.substr(0, comma);
        if (comma != std::string::npos) report.measurement_p = std::stol(value.substr(comma + 1));
      }
      continue;
    }
    if (!header_seen) {
      if (line.rfind("scaled_freq,", 0) != 0)
        throw ParseError("report csv header missing", line_no);
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    std::string field;
    ReportMode m;
    try {
      std::getline(row, field, ',');
      m.scaled_freq = std::stod(field);
      std::getline(row, field, ',');
      m.damping_ratio = std::stod(field);
      std::getline(row, field, ',');
      m.growth_rate = std::stod(field);
      std::getline(row, field, ',');
      m.amplitude = std::stod(field);
      std::getline(row, field, ',');
      m.is_static = field == "1";
      std::getline(row, m.flags, ',');
    } catch (const std::exception&) {
      throw ParseError("malformed report csv row", line_no);
    }
    report.modes.push_back(std::move(m));
  }
  if (!header_seen) throw ParseError("report csv has no header", line_no);
  return report;
}

ModeReport load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open report '" + path + "'");
  const auto ext = std::filesystem::path(path).extension();
  if (ext == ".csv") return parse_report_csv(in);
  return parse_report_json(in);
}

ComparisonTable compare_reports(const ModeReport& a, const ModeReport& b, double freq_tol) {
  // relative frequency distance, treating two near-zero frequencies as equal
  const auto distance = [](double fa, double fb) {
    if (fa < 1e-4 && fb < 1e-4) return 0.0;
    return std::abs(fb - fa) / std::max(fa, 1e-9);
  };

  struct Candidate {
    double dist;
    int i, j;
  };
  std::vector<Candidate> candidates;
  for (int i = 0; i < static_cast<int>(a.modes.size()); ++i)
    for (int j = 0; j < static_cast<int>(b.modes.size()); ++j) {
      const double dist = distance(a.modes[i].scaled_freq, b.modes[j].scaled_freq);
      if (dist <= freq_tol) candidates.push_back({dist, i, j});
    }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.dist != y.dist) return x.dist < y.dist;
    return std::tie(x.i, x.j) < std::tie(y.i, y.j);
  });

  std::vector<int> match_of_a(a.modes.size(), -1);
  std::vector<int> match_of_b(b.modes.size(), -1);
  for (const auto& c : candidates)
    if (match_of_a[c.i] < 0 && match_of_b[c.j] < 0) {
      match_of_a[c.i] = c.j;
      match_of_b[c.j] = c.i;
    }

  ComparisonTable table;
  for (int i = 0; i < static_cast<int>(a.modes.size()); ++i) {
    ComparisonRow row;
    row.index_a = i;
    row.freq_a = a.modes[i].scaled_freq;
    row.damp_a = a.modes[i].damping_ratio;
    const int j = match_of_a[i];
    if (j >= 0) {
      row.index_b = j;
      row.freq_b = b.modes[j].scaled_freq;
      row.damp_b = b.modes[j].damping_ratio;
      row.freq_err_pct =
          row.freq_a != 0.0 ? 100.0 * std::abs(row.freq_b - row.freq_a) / row.freq_a : 0.0;
      row.damp_err_pct =
          row.damp_a != 0.0 ? 100.0 * std::abs(row.damp_b - row.damp_a) / row.damp_a
                            : (row.damp_b == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
      ++table.matched;
    } else {
      row.flag = "unmatched";
      ++table.only_a;
    }
    table.rows.push_back(row);
  }
  for (int j = 0; j < static_cast<int>(b.modes.size()); ++j) {
    if (match_of_b[j] >= 0) continue;
    ComparisonRow row;
    row.index_b = j;
    row.freq_b = b.modes[j].scaled_freq;
    row.damp_b = b.modes[j].damping_ratio;
    row.flag = "unmatched";
    ++table.only_b;
    table.rows.push_back(row);
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const ComparisonRow& x, const ComparisonRow& y) {
    const double fx = x.index_a >= 0 ? x.freq_a : x.freq_b;
    const double fy = y.index_a >= 0 ? y.freq_a : y.freq_b;
    return fx < fy;
  });
  return table;
}

void print_comparison(const ComparisonTable& table, std::ostream& out) {
  out << std::right << std::setw(10) << "freq_a" << std::setw(10) << "damp_a" << std::setw(10)
      << "freq_b" << std::setw(12) << "freq_err%" << std::setw(10) << "damp_b" << std::setw(12)
      << "damp_err%" << "  flag\n";
  const auto cell = [&](double v, int width, int precision) {
    out << std::setw(width) << std::fixed << std::setprecision(precision) << v;
  };
  for (const auto& row : table.rows) {
    if (row.index_a >= 0) {
      cell(row.freq_a, 10, 4);
      cell(row.damp_a, 10, 4);
    } else {
      out << std::setw(10) << "-" << std::setw(10) << "-";
    }
    if (row.index_b >= 0) {
      cell(row.freq_b, 10, 4);
      if (row.index_a >= 0) cell(row.freq_err_pct, 12, 2);
      else out << std::setw(12) << "-";
      cell(row.damp_b, 10, 4);
      if (row.index_a >= 0) cell(row.damp_err_pct, 12, 2);
      else out << std::setw(12) << "-";
    } else {
      out << std::setw(10) << "-" << std::setw(12) << "-" << std::setw(10) << "-" << std::setw(12)
          << "-";
    }
    out << "  " << row.flag << '\n';
    out.unsetf(std::ios::floatfield);
  }
  out << table.matched << " matched, " << table.only_a << " only in a, " << table.only_b
      << " only in b\n";
}

void save_comparison_csv(const ComparisonTable& table, std::ostream& out) {
  out << "freq_a,damp_a,freq_b,damp_b,freq_err_pct,damp_err_pct,flag\n";
  const auto num = [](double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
  };
  for (const auto& row : table.rows) {
    out << (row.index_a >= 0 ? num(row.freq_a) : "") << ','
        << (row.index_a >= 0 ? num(row.damp_a) : "") << ','
        << (row.index_b >= 0 ? num(row.freq_b) : "") << ','
        << (row.index_b >= 0 ? num(row.damp_b) : "") << ','
        << (row.index_a >= 0 && row.index_b >= 0 ? num(row.freq_err_pct) : "") << ','
        << (row.index_a >= 0 && row.index_b >= 0 ? num(row.damp_err_pct) : "") << ',' << row.flag
        << '\n';
  }
}

} // namespace aeromodal
