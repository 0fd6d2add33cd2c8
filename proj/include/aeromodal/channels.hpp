#ifndef AEROMODAL_CHANNELS_HPP
#define AEROMODAL_CHANNELS_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "aeromodal/errors.hpp"

namespace aeromodal {

// One accelerometer channel. Channels that produced non-numeric or non-finite
// readings are kept but flagged invalid, so reports can account for exclusions.
struct ChannelRecord {
  std::string channel_id;
  Eigen::VectorXd samples;
  bool valid = true;
};

struct TestPointDataset {
  std::string test_point_id;
  std::vector<ChannelRecord> channels;
  double dt = 1.0;

  Eigen::Index sample_count() const {
    return channels.empty() ? 0 : channels.front().samples.size();
  }
  Eigen::Index valid_channel_count() const {
    Eigen::Index n = 0;
    for (const auto& ch : channels) n += ch.valid ? 1 : 0;
    return n;
  }
};

// One impulsive excitation segment. `index` is 1-based and follows time order.
struct ManeuverWindow {
  int index = 0;
  Eigen::Index start = 0;
  Eigen::Index length = 0;
};

struct RowLabel {
  std::string channel_id;
  int maneuver = 0;
};

// Stacked data matrix: one row per (valid channel, maneuver), channel-major.
struct SnapshotMatrix {
  Eigen::MatrixXd values;
  std::vector<RowLabel> row_labels;
  double dt = 1.0;
};

enum class ChannelFormat { Auto, Csv, Bin };

// Loaders accept "channels-csv" (header `time,ch_<id>,...`) and "channels-bin"
// (magic "AMCH", u32 n_channels, u32 n_samples, f64 dt, column-major f64).
TestPointDataset load_channels(const std::string& path, ChannelFormat format = ChannelFormat::Auto);
TestPointDataset load_channels_csv(std::istream& in, const std::string& test_point_id);
TestPointDataset load_channels_bin(std::istream& in, const std::string& test_point_id);
void save_channels(const TestPointDataset& dataset, const std::string& path,
                   ChannelFormat format = ChannelFormat::Auto);
void save_channels_csv(const TestPointDataset& dataset, std::ostream& out);
void save_channels_bin(const TestPointDataset& dataset, std::ostream& out);

// Signal-to-noise estimate in dB. Noise power comes from the variance of the
// first difference (white-noise estimator, var(diff)/2); signal power is the
// remainder of the sample variance, floored at zero. Returns -inf when no
// signal power remains, +inf for a noise-free non-constant record.
double compute_snr(const ChannelRecord& record);

// RMS envelope across valid channels, smoothed by a centered moving average.
Eigen::VectorXd maneuver_envelope(const TestPointDataset& dataset, int smooth_width = 51);

// Locates `count` maneuvers as the largest local maxima of the smoothed RMS
// envelope, separated by at least window_length. Windows start at
// peak - preroll*window_length, clamped to the record.
std::vector<ManeuverWindow> detect_maneuvers(const TestPointDataset& dataset, int count,
                                             Eigen::Index window_length, double preroll = 0.05);

// Stacks maneuver segments channel-major (all maneuvers of channel 1, then
// channel 2, ...). Rows are raw segments; per-row demeaning is opt-in.
SnapshotMatrix build_snapshot_matrix(const TestPointDataset& dataset,
                                     const std::vector<ManeuverWindow>& windows,
                                     Eigen::Index window_length = 2200, bool demean = false);

// Persist an arbitrary matrix in the channels-csv layout (rows become columns).
void save_matrix_csv(const Eigen::MatrixXd& values, const std::vector<std::string>& column_ids,
                     std::ostream& out);

} // namespace aeromodal

#endif
