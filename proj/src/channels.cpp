#include "aeromodal/channels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace aeromodal {

namespace {

bool parse_double(std::string_view text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
  if (first == last) return false;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void split_csv_line(const std::string& line, std::vector<std::string_view>& fields) {
  fields.clear();
  std::string_view view(line);
  if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = view.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.push_back(view.substr(pos));
      break;
    }
    fields.push_back(view.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

template <class T>
void write_le(std::ostream& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.write(bytes, sizeof(T));
}

template <class T>
T read_le(std::istream& in) {
  char bytes[sizeof(T)];
  in.read(bytes, sizeof(T));
  T value{};
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

} // namespace

TestPointDataset load_channels_csv(std::istream& in, const std::string& test_point_id) {
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty channels-csv stream", 1);
  ++line_no;

  std::vector<std::string_view> fields;
  split_csv_line(line, fields);
  if (fields.empty() || fields[0] != "time")
    throw ParseError("channels-csv header must start with 'time'", line_no);

  TestPointDataset dataset;
  dataset.test_point_id = test_point_id;
  const std::size_t n_channels = fields.size() - 1;
  if (n_channels == 0) throw ParseError("channels-csv header declares no channels", line_no);
  dataset.channels.resize(n_channels);
  for (std::size_t c = 0; c < n_channels; ++c) {
    std::string_view name = fields[c + 1];
    if (name.rfind("ch_", 0) == 0) name.remove_prefix(3);
    dataset.channels[c].channel_id = std::string(name);
  }

  std::vector<std::vector<double>> columns(n_channels);
  std::vector<double> times;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    split_csv_line(line, fields);
    if (fields.size() != n_channels + 1)
      throw ParseError("row has " + std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(n_channels + 1),
                       line_no);
    double t = 0.0;
    if (!parse_double(fields[0], t)) throw ParseError("non-numeric time value", line_no);
    times.push_back(t);
    for (std::size_t c = 0; c < n_channels; ++c) {
      double v = std::numeric_limits<double>::quiet_NaN();
      if (!parse_double(fields[c + 1], v)) {
        v = std::numeric_limits<double>::quiet_NaN();
        dataset.channels[c].valid = false;
      }
      columns[c].push_back(v);
    }
  }
  if (times.empty()) throw ParseError("channels-csv has a header but no sample rows", line_no);

  for (std::size_t c = 0; c < n_channels; ++c) {
    auto& ch = dataset.channels[c];
    ch.samples = Eigen::Map<const Eigen::VectorXd>(columns[c].data(),
                                                   static_cast<Eigen::Index>(columns[c].size()));
    if (ch.valid && !ch.samples.allFinite()) ch.valid = false;
  }
  return dataset;
}

TestPointDataset load_channels_bin(std::istream& in, const std::string& test_point_id) {
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "AMCH", 4) != 0)
    throw ParseError("channels-bin stream lacks AMCH magic", 1);
  const auto n_channels = read_le<std::uint32_t>(in);
  const auto n_samples = read_le<std::uint32_t>(in);
  const double dt = read_le<double>(in);
  if (!in) throw ParseError("truncated channels-bin header", 1);
  if (n_channels == 0 || n_samples == 0)
    throw ParseError("channels-bin declares an empty dataset", 1);
  if (!(dt > 0)) throw ParseError("channels-bin dt must be positive", 1);

  TestPointDataset dataset;
  dataset.test_point_id = test_point_id;
  dataset.dt = dt;
  dataset.channels.resize(n_channels);
  for (std::uint32_t c = 0; c < n_channels; ++c) {
    auto& ch = dataset.channels[c];
    char name[8];
    std::snprintf(name, sizeof(name), "%02u", c);
    ch.channel_id = name;
    ch.samples.resize(n_samples);
    in.read(reinterpret_cast<char*>(ch.samples.data()),
            static_cast<std::streamsize>(sizeof(double) * n_samples));
    if (!in) throw ParseError("truncated channels-bin payload in channel " + ch.channel_id, 1);
    ch.valid = ch.samples.allFinite();
  }
  return dataset;
}

TestPointDataset load_channels(const std::string& path, ChannelFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  if (format == ChannelFormat::Auto) {
    char magic[4] = {};
    in.read(magic, 4);
    in.clear();
    in.seekg(0);
    format = std::memcmp(magic, "AMCH", 4) == 0 ? ChannelFormat::Bin : ChannelFormat::Csv;
  }
  const std::string id = std::filesystem::path(path).stem().string();
  try {
    return format == ChannelFormat::Bin ? load_channels_bin(in, id) : load_channels_csv(in, id);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_channels_csv(const TestPointDataset& dataset, std::ostream& out) {
  out << "time";
  for (const auto& ch : dataset.channels) out << ",ch_" << ch.channel_id;
  out << '\n';
  const Eigen::Index n = dataset.sample_count();
  for (Eigen::Index i = 0; i < n; ++i) {
    out << format_double(static_cast<double>(i) * dataset.dt);
    for (const auto& ch : dataset.channels) out << ',' << format_double(ch.samples(i));
    out << '\n';
  }
}

void save_channels_bin(const TestPointDataset& dataset, std::ostream& out) {
  out.write("AMCH", 4);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.channels.size()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.sample_count()));
  write_le<double>(out, dataset.dt);
  for (const auto& ch : dataset.channels)
    out.write(reinterpret_cast<const char*>(ch.samples.data()),
              static_cast<std::streamsize>(sizeof(double) * ch.samples.size()));
}

void save_channels(const TestPointDataset& dataset, const std::string& path, ChannelFormat format) {
  if (format == ChannelFormat::Auto)
    format = std::filesystem::path(path).extension() == ".bin" ? ChannelFormat::Bin
                                                               : ChannelFormat::Csv;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  if (format == ChannelFormat::Bin)
    save_channels_bin(dataset, out);
  else
    save_channels_csv(dataset, out);
}

double compute_snr(const ChannelRecord& record) {
  if (!record.valid) throw NumericalError("compute_snr: channel " + record.channel_id + " is invalid");
  const Eigen::Index n = record.samples.size();
  if (n < 16) throw NumericalError("compute_snr: need at least 16 samples");

  const auto& x = record.samples;
  const double mean = x.mean();
  const double var = (x.array() - mean).square().sum() / static_cast<double>(n);

  const Eigen::VectorXd diff = x.tail(n - 1) - x.head(n - 1);
  const double diff_mean = diff.mean();
  const double diff_var = (diff.array() - diff_mean).square().sum() / static_cast<double>(n - 1);

  const double noise_power = 0.5 * diff_var;
  const double signal_power = std::max(var - noise_power, 0.0);
  if (signal_power <= 0.0) return -std::numeric_limits<double>::infinity();
  if (noise_power <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal_power / noise_power);
}

Eigen::VectorXd maneuver_envelope(const TestPointDataset& dataset, int smooth_width) {
  const Eigen::Index n = dataset.sample_count();
  if (n == 0) throw NumericalError("maneuver_envelope: empty dataset");

  Eigen::VectorXd power = Eigen::VectorXd::Zero(n);
  Eigen::Index used = 0;
  for (const auto& ch : dataset.channels) {
    if (!ch.valid) continue;
    power += ch.samples.array().square().matrix();
    ++used;
  }
  if (used == 0) throw NumericalError("maneuver_envelope: no valid channels");
  const Eigen::VectorXd rms = (power / static_cast<double>(used)).cwiseSqrt();

  // centered moving average; windows truncate at the record edges
  const Eigen::Index half = smooth_width / 2;
  Eigen::VectorXd prefix(n + 1);
  prefix(0) = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) prefix(i + 1) = prefix(i) + rms(i);
  Eigen::VectorXd smooth(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - half);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + half);
    smooth(i) = (prefix(hi + 1) - prefix(lo)) / static_cast<double>(hi - lo + 1);
  }
  return smooth;
}

std::vector<ManeuverWindow> detect_maneuvers(const TestPointDataset& dataset, int count,
                                             Eigen::Index window_length, double preroll) {
  if (count < 1) throw NumericalError("detect_maneuvers: count must be >= 1");
  const Eigen::Index n = dataset.sample_count();
  if (window_length < 1 || window_length > n)
    throw NumericalError("detect_maneuvers: window_length infeasible for record length " +
                         std::to_string(n));

  const Eigen::VectorXd env = maneuver_envelope(dataset);

  std::vector<Eigen::Index> maxima;
  for (Eigen::Index i = 1; i + 1 < n; ++i)
    if (env(i) > env(i - 1) && env(i) >= env(i + 1)) maxima.push_back(i);
  std::sort(maxima.begin(), maxima.end(),
            [&](Eigen::Index a, Eigen::Index b) { return env(a) > env(b); });

  std::vector<Eigen::Index> peaks;
  for (const Eigen::Index candidate : maxima) {
    bool separated = true;
    for (const Eigen::Index kept : peaks)
      if (std::abs(candidate - kept) < window_length) {
        separated = false;
        break;
      }
    if (separated) {
      peaks.push_back(candidate);
      if (static_cast<int>(peaks.size()) == count) break;
    }
  }
  if (static_cast<int>(peaks.size()) < count) {
    std::ostringstream msg;
    msg << "detect_maneuvers: found " << peaks.size() << " separable peaks, need " << count
        << "; peaks at [";
    for (std::size_t i = 0; i < peaks.size(); ++i) msg << (i ? ", " : "") << peaks[i];
    msg << "]";
    throw NumericalError(msg.str());
  }
  std::sort(peaks.begin(), peaks.end());

  const auto lead = static_cast<Eigen::Index>(std::llround(preroll * static_cast<double>(window_length)));
  std::vector<ManeuverWindow> windows;
  windows.reserve(peaks.size());
  int index = 1;
  for (const Eigen::Index peak : peaks) {
    ManeuverWindow w;
    w.index = index++;
    w.start = std::clamp<Eigen::Index>(peak - lead, 0, n - window_length);
    w.length = window_length;
    windows.push_back(w);
  }
  for (std::size_t i = 1; i < windows.size(); ++i)
    if (windows[i].start < windows[i - 1].start + windows[i - 1].length)
      throw NumericalError("detect_maneuvers: clamping produced overlapping windows");
  return windows;
}

SnapshotMatrix build_snapshot_matrix(const TestPointDataset& dataset,
                                     const std::vector<ManeuverWindow>& windows,
                                     Eigen::Index window_length, bool demean) {
  const Eigen::Index n = dataset.sample_count();
  const Eigen::Index n_valid = dataset.valid_channel_count();
  if (n_valid == 0) throw NumericalError("build_snapshot_matrix: no valid channels");
  if (windows.empty()) throw NumericalError("build_snapshot_matrix: no maneuver windows");
  for (const auto& w : windows)
    if (w.start < 0 || w.start + window_length > n)
      throw NumericalError("build_snapshot_matrix: window " + std::to_string(w.index) +
                           " exceeds record bounds");

  SnapshotMatrix snap;
  snap.dt = dataset.dt;
  snap.values.resize(n_valid * static_cast<Eigen::Index>(windows.size()), window_length);
  snap.row_labels.reserve(static_cast<std::size_t>(snap.values.rows()));

  Eigen::Index row = 0;
  for (const auto& ch : dataset.channels) {
    if (!ch.valid) continue;
    for (const auto& w : windows) {
      snap.values.row(row) = ch.samples.segment(w.start, window_length).transpose();
      if (demean) snap.values.row(row).array() -= snap.values.row(row).mean();
      snap.row_labels.push_back({ch.channel_id, w.index});
      ++row;
    }
  }
  return snap;
}

void save_matrix_csv(const Eigen::MatrixXd& values, const std::vector<std::string>& column_ids,
                     std::ostream& out) {
  out << "time";
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    if (r < static_cast<Eigen::Index>(column_ids.size()))
      out << ",ch_" << column_ids[static_cast<std::size_t>(r)];
    else
      out << ",ch_r" << r;
  }
  out << '\n';
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    out << c;
    for (Eigen::Index r = 0; r < values.rows(); ++r) out << ',' << format_double(values(r, c));
    out << '\n';
  }
}

} // namespace aeromodal
