#include "bsx/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "bsx/errors.hpp"

namespace bsx {

namespace {

constexpr std::int64_t kHour = 3600;

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* begin = t.data();
  const char* end = begin + t.size();
  auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

// days_from_civil (Hinnant); avoids timegm and locale machinery.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool parse_timestamp(const std::string& raw, std::int64_t& out) {
  const std::string s = trim(raw);
  if (s.empty()) return false;
  // Plain integer => epoch seconds.
  {
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec == std::errc() && res.ptr == s.data() + s.size()) {
      out = v;
      return true;
    }
  }
  // ISO-8601: YYYY-MM-DD[T ]HH:MM[:SS][Z]
  int y, mo, d, h, mi, sec = 0;
  char sep;
  int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h,
                      &mi, &sec);
  if (n < 6 || (sep != 'T' && sep != ' ')) return false;
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 ||
      mi > 59 || sec < 0 || sec > 60)
    return false;
  out = days_from_civil(y, static_cast<unsigned>(mo),
                        static_cast<unsigned>(d)) *
            86400 +
        h * 3600 + mi * 60 + sec;
  return true;
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<Index> TimeSeriesFrame::occupancy_columns() const {
  std::vector<Index> out;
  for (Index i = 0; i < static_cast<Index>(channel_meta.size()); ++i)
    if (channel_meta[i].kind == ChannelKind::kOccupancy) out.push_back(i);
  return out;
}

std::vector<Index> TimeSeriesFrame::environmental_columns() const {
  std::vector<Index> out;
  for (Index i = 0; i < static_cast<Index>(channel_meta.size()); ++i)
    if (channel_meta[i].kind == ChannelKind::kEnvironmental) out.push_back(i);
  return out;
}

bool TimeSeriesFrame::is_hourly() const {
  for (std::size_t i = 1; i < timestamps.size(); ++i)
    if (timestamps[i] - timestamps[i - 1] != kHour) return false;
  return true;
}

TimeSeriesFrame load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  auto header = split_line(line);
  if (header.size() < 3 || trim(header[0]) != "timestamp" ||
      trim(header[1]) != "traffic_volume")
    throw DataError(path +
                    ": header must be timestamp,traffic_volume,<channels...>");

  std::vector<ChannelMeta> meta;
  for (std::size_t c = 2; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    ChannelMeta m;
    m.name = name;
    if (name.rfind("occ:", 0) == 0)
      m.kind = ChannelKind::kOccupancy;
    else if (name.rfind("env:", 0) == 0)
      m.kind = ChannelKind::kEnvironmental;
    else
      throw DataError(path + ": channel column '" + name +
                      "' must be prefixed occ: or env:");
    meta.push_back(m);
  }
  const Index n_channels = static_cast<Index>(meta.size());

  struct Row {
    std::int64_t ts;
    double traffic;
    std::vector<double> channels;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != header.size())
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " columns, got " +
                      std::to_string(cells.size()));
    Row r;
    if (!parse_timestamp(cells[0], r.ts))
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": bad value in column 'timestamp'");
    if (!parse_double(cells[1], r.traffic) || r.traffic < 0.0)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": bad value in column 'traffic_volume'");
    r.channels.resize(static_cast<std::size_t>(n_channels));
    for (Index c = 0; c < n_channels; ++c) {
      if (!parse_double(cells[static_cast<std::size_t>(c) + 2],
                        r.channels[static_cast<std::size_t>(c)]))
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": bad value in column '" +
                        meta[static_cast<std::size_t>(c)].name + "'");
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw DataError(path + ": no data rows");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.ts < b.ts; });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].ts == rows[i - 1].ts)
      throw DataError(path + ": duplicate timestamp " +
                      std::to_string(rows[i].ts));

  TimeSeriesFrame frame;
  frame.channel_meta = std::move(meta);
  frame.timestamps.reserve(rows.size());
  frame.channels.resize(static_cast<Index>(rows.size()), n_channels);
  frame.traffic.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    frame.timestamps.push_back(rows[i].ts);
    frame.traffic(static_cast<Index>(i)) = rows[i].traffic;
    for (Index c = 0; c < n_channels; ++c)
      frame.channels(static_cast<Index>(i), c) =
          rows[i].channels[static_cast<std::size_t>(c)];
  }
  return frame;
}

void write_csv(const TimeSeriesFrame& frame, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "timestamp,traffic_volume";
  for (const auto& m : frame.channel_meta) out << "," << m.name;
  out << "\n";
  for (Index i = 0; i < frame.rows(); ++i) {
    out << frame.timestamps[static_cast<std::size_t>(i)] << ","
        << format_double(frame.traffic(i));
    for (Index c = 0; c < frame.num_channels(); ++c)
      out << "," << format_double(frame.channels(i, c));
    out << "\n";
  }
}

TimeSeriesFrame synchronize_hourly(const TimeSeriesFrame& raw,
                                   FillPolicy policy) {
  if (raw.rows() == 0) throw DataError("synchronize_hourly: empty frame");
  const Index n_channels = raw.num_channels();

  // Mean-aggregate readings into hour buckets.
  std::map<std::int64_t, std::pair<Vector, Index>> buckets;  // sum, count
  for (Index i = 0; i < raw.rows(); ++i) {
    std::int64_t hour = raw.timestamps[static_cast<std::size_t>(i)] / kHour;
    auto [it, fresh] =
        buckets.try_emplace(hour, Vector::Zero(n_channels + 1), 0);
    it->second.first.head(n_channels) += raw.channels.row(i).transpose();
    it->second.first(n_channels) += raw.traffic(i);
    it->second.second += 1;
  }

  const std::int64_t first = buckets.begin()->first;
  const std::int64_t last = buckets.rbegin()->first;
  const Index n = static_cast<Index>(last - first + 1);

  TimeSeriesFrame out;
  out.channel_meta = raw.channel_meta;
  out.timestamps.resize(static_cast<std::size_t>(n));
  out.channels.resize(n, n_channels);
  out.traffic.resize(n);

  std::vector<bool> observed(static_cast<std::size_t>(n), false);
  for (Index i = 0; i < n; ++i) {
    out.timestamps[static_cast<std::size_t>(i)] = (first + i) * kHour;
    auto it = buckets.find(first + i);
    if (it == buckets.end()) continue;
    observed[static_cast<std::size_t>(i)] = true;
    const Vector mean = it->second.first / it->second.second;
    out.channels.row(i) = mean.head(n_channels).transpose();
    out.traffic(i) = mean(n_channels);
  }

  // Fill gaps: short ones by linear interpolation, longer ones by repeating
  // the last observation; anything beyond max_gap_hours means the data is
  // too sparse to trust.
  Index i = 0;
  while (i < n) {
    if (observed[static_cast<std::size_t>(i)]) {
      ++i;
      continue;
    }
    Index j = i;
    while (j < n && !observed[static_cast<std::size_t>(j)]) ++j;
    const Index gap = j - i;
    if (gap > policy.max_gap_hours)
      throw DataError("synchronize_hourly: gap of " + std::to_string(gap) +
                      " hours exceeds " +
                      std::to_string(policy.max_gap_hours) + "h limit");
    const bool interp =
        gap <= policy.max_interp_gap_hours && i > 0 && j < n;
    for (Index k = i; k < j; ++k) {
      if (interp) {
        const double w =
            static_cast<double>(k - (i - 1)) / static_cast<double>(j - (i - 1));
        out.channels.row(k) =
            (1.0 - w) * out.channels.row(i - 1) + w * out.channels.row(j);
        out.traffic(k) = (1.0 - w) * out.traffic(i - 1) + w * out.traffic(j);
      } else if (i > 0) {
        out.channels.row(k) = out.channels.row(i - 1);
        out.traffic(k) = out.traffic(i - 1);
      } else {  // leading gap: back-fill from the first observation
        out.channels.row(k) = out.channels.row(j);
        out.traffic(k) = out.traffic(j);
      }
    }
    i = j;
  }
  return out;
}

NormStats fit_norm(const TimeSeriesFrame& frame, double train_fraction) {
  if (train_fraction <= 0.0 || train_fraction > 1.0)
    throw ConfigError("fit_norm: train_fraction must be in (0, 1]");
  const Index n =
      std::max<Index>(2, static_cast<Index>(std::floor(
                             frame.rows() * train_fraction)));
  if (n > frame.rows())
    throw DataError("fit_norm: frame too short for requested train fraction");

  NormStats s;
  s.channel_mean.resize(frame.num_channels());
  s.channel_std.resize(frame.num_channels());
  for (Index c = 0; c < frame.num_channels(); ++c) {
    const auto col = frame.channels.col(c).head(n);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / (n - 1);
    const double sd = std::sqrt(var);
    if (!(sd > 0.0))
      throw DataError("fit_norm: zero-variance channel '" +
                      frame.channel_meta[static_cast<std::size_t>(c)].name +
                      "'");
    s.channel_mean(c) = mean;
    s.channel_std(c) = sd;
  }
  const auto t = frame.traffic.head(n);
  s.traffic_mean = t.mean();
  const double tvar = (t.array() - s.traffic_mean).square().sum() / (n - 1);
  s.traffic_std = std::sqrt(tvar);
  if (!(s.traffic_std > 0.0))
    throw DataError("fit_norm: zero-variance traffic series");
  return s;
}

TimeSeriesFrame apply_norm(const TimeSeriesFrame& frame, const NormStats& s) {
  TimeSeriesFrame out = frame;
  for (Index c = 0; c < frame.num_channels(); ++c)
    out.channels.col(c) =
        (frame.channels.col(c).array() - s.channel_mean(c)) / s.channel_std(c);
  out.traffic =
      (frame.traffic.array() - s.traffic_mean) / s.traffic_std;
  return out;
}

TimeSeriesFrame invert_norm(const TimeSeriesFrame& frame, const NormStats& s) {
  TimeSeriesFrame out = frame;
  for (Index c = 0; c < frame.num_channels(); ++c)
    out.channels.col(c) =
        frame.channels.col(c).array() * s.channel_std(c) + s.channel_mean(c);
  out.traffic = frame.traffic.array() * s.traffic_std + s.traffic_mean;
  return out;
}

Vector invert_norm_traffic(const Vector& values, const NormStats& s) {
  return values.array() * s.traffic_std + s.traffic_mean;
}

namespace {

TimeSeriesFrame slice_frame(const TimeSeriesFrame& frame, Index begin,
                            Index count) {
  TimeSeriesFrame out;
  out.channel_meta = frame.channel_meta;
  out.timestamps.assign(
      frame.timestamps.begin() + static_cast<std::ptrdiff_t>(begin),
      frame.timestamps.begin() + static_cast<std::ptrdiff_t>(begin + count));
  out.channels = frame.channels.middleRows(begin, count);
  out.traffic = frame.traffic.segment(begin, count);
  return out;
}

}  // namespace

SplitFrames chronological_split(const TimeSeriesFrame& frame) {
  const Index n = frame.rows();
  if (n < 10) throw DataError("chronological_split: need at least 10 rows");
  const Index n_train = static_cast<Index>(std::floor(0.7 * n));
  const Index n_val = static_cast<Index>(std::floor(0.1 * n));
  const Index n_test = n - n_train - n_val;
  SplitFrames out;
  out.train = slice_frame(frame, 0, n_train);
  out.validation = slice_frame(frame, n_train, n_val);
  out.test = slice_frame(frame, n_train + n_val, n_test);
  return out;
}

std::vector<SampleWindow> make_windows(const TimeSeriesFrame& frame, Index L,
                                       Index tau, Index stride) {
  if (L < 1 || tau < 1) throw ConfigError("make_windows: L and tau must be >= 1");
  if (stride < 1) throw ConfigError("make_windows: stride must be >= 1");
  if (frame.rows() < L + tau - 1)
    throw DataError("make_windows: frame of " + std::to_string(frame.rows()) +
                    " rows is shorter than L+tau-1 = " +
                    std::to_string(L + tau - 1));

  std::vector<SampleWindow> out;
  for (Index t = L - 1; t + tau - 1 < frame.rows(); t += stride) {
    SampleWindow w;
    w.exo = frame.channels.middleRows(t - L + 1, L);
    w.hist = frame.traffic.segment(t - L + 1, L - 1);
    w.label = frame.traffic.segment(t, tau);
    w.anchor = frame.timestamps[static_cast<std::size_t>(t)];
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace bsx
