#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsx/tensor.hpp"

namespace bsx {

enum class ChannelKind { kOccupancy, kEnvironmental };

struct ChannelMeta {
  std::string name;  // column header, e.g. "occ:lobby" or "env:co2"
  ChannelKind kind = ChannelKind::kOccupancy;
};

// Multi-channel building series plus the traffic target. load_csv() returns a
// sorted frame; synchronize_hourly() establishes the strict one-row-per-hour
// grid the rest of the pipeline relies on.
struct TimeSeriesFrame {
  std::vector<std::int64_t> timestamps;  // epoch seconds
  Matrix channels;                       // rows x N, one row per timestamp
  std::vector<ChannelMeta> channel_meta;
  Vector traffic;                        // vehicles/hour

  Index rows() const { return static_cast<Index>(timestamps.size()); }
  Index num_channels() const { return channels.cols(); }
  std::vector<Index> occupancy_columns() const;
  std::vector<Index> environmental_columns() const;
  bool is_hourly() const;
};

// One training/inference sample. A sample anchored at hour t covers exo rows
// [t-L+1 .. t], hist = traffic [t-L+1 .. t-1] and label = traffic
// [t .. t+tau-1]; channel order matches the frame.
struct SampleWindow {
  Matrix exo;
  Vector hist;
  Vector label;
  std::int64_t anchor = 0;  // timestamp of label[0]
};

// Per-channel z-score statistics, fitted on the training rows only.
struct NormStats {
  Vector channel_mean;
  Vector channel_std;
  double traffic_mean = 0.0;
  double traffic_std = 1.0;
};

struct FillPolicy {
  Index max_interp_gap_hours = 3;  // linear interpolation up to here
  Index max_gap_hours = 24;        // repeat-last up to here, reject beyond
};

struct SplitFrames {
  TimeSeriesFrame train;
  TimeSeriesFrame validation;
  TimeSeriesFrame test;
};

// CSV schema: header `timestamp,traffic_volume,<occ:...|env:...>*`; timestamps
// are epoch seconds or ISO-8601. Rows come back sorted by timestamp.
TimeSeriesFrame load_csv(const std::string& path);
void write_csv(const TimeSeriesFrame& frame, const std::string& path);

TimeSeriesFrame synchronize_hourly(const TimeSeriesFrame& raw,
                                   FillPolicy policy = {});

NormStats fit_norm(const TimeSeriesFrame& frame, double train_fraction);
TimeSeriesFrame apply_norm(const TimeSeriesFrame& frame, const NormStats& s);
TimeSeriesFrame invert_norm(const TimeSeriesFrame& frame, const NormStats& s);
Vector invert_norm_traffic(const Vector& values, const NormStats& s);

// Contiguous 70/10/20 partition by row count (floor for train/validation).
SplitFrames chronological_split(const TimeSeriesFrame& frame);

std::vector<SampleWindow> make_windows(const TimeSeriesFrame& frame, Index L,
                                       Index tau, Index stride = 1);

}  // namespace bsx
