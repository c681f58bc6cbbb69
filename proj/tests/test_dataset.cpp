#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "bsx/dataset.hpp"
#include "bsx/errors.hpp"
#include "bsx/prng.hpp"

using namespace bsx;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& contents) {
    static int counter = 0;
    path = "bsx_test_" + std::to_string(counter++) + ".csv";
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

// Hourly frame with one occupancy and one environmental channel.
TimeSeriesFrame make_frame(Index rows, std::uint64_t seed = 1) {
  TimeSeriesFrame f;
  RandomStream rs(seed, 0);
  f.channel_meta = {{"occ:a", ChannelKind::kOccupancy},
                    {"env:b", ChannelKind::kEnvironmental}};
  f.channels.resize(rows, 2);
  f.traffic.resize(rows);
  for (Index i = 0; i < rows; ++i) {
    f.timestamps.push_back(1514764800 + i * 3600);
    f.channels(i, 0) = 100.0 + 10.0 * rs.normal();
    f.channels(i, 1) = 50.0 + 5.0 * rs.normal();
    f.traffic(i) = 500.0 + 50.0 * rs.normal();
  }
  return f;
}

}  // namespace

TEST_CASE("load_csv parses a well-formed file") {
  TempFile file(
      "timestamp,traffic_volume,occ:lobby,env:co2\n"
      "2018-01-01T00:00:00,120,5,410.5\n"
      "2018-01-01T01:00:00,90,3,400\n"
      "2018-01-01T02:00:00,100,4,405\n");
  const TimeSeriesFrame f = load_csv(file.path);
  CHECK(f.rows() == 3);
  CHECK(f.num_channels() == 2);
  CHECK(f.channel_meta[0].kind == ChannelKind::kOccupancy);
  CHECK(f.channel_meta[1].kind == ChannelKind::kEnvironmental);
  CHECK(f.traffic(0) == 120.0);
  CHECK(f.channels(2, 1) == 405.0);
  CHECK(f.timestamps[0] == 1514764800);
  CHECK(f.is_hourly());
}

TEST_CASE("load_csv accepts epoch timestamps and sorts shuffled rows") {
  TempFile sorted(
      "timestamp,traffic_volume,occ:a\n"
      "1514764800,10,1\n1514768400,20,2\n1514772000,30,3\n");
  TempFile shuffled(
      "timestamp,traffic_volume,occ:a\n"
      "1514772000,30,3\n1514764800,10,1\n1514768400,20,2\n");
  const TimeSeriesFrame a = load_csv(sorted.path);
  const TimeSeriesFrame b = load_csv(shuffled.path);
  CHECK(a.timestamps == b.timestamps);
  CHECK(a.traffic == b.traffic);
  CHECK(a.channels == b.channels);
}

TEST_CASE("load_csv names the row and column of a bad value") {
  TempFile file(
      "timestamp,traffic_volume,occ:a\n"
      "1514764800,10,1\n"
      "1514768400,10,oops\n");
  CHECK_THROWS_WITH_AS(load_csv(file.path), doctest::Contains(":3"),
                       DataError);
  CHECK_THROWS_WITH_AS(load_csv(file.path), doctest::Contains("occ:a"),
                       DataError);
}

TEST_CASE("load_csv rejects duplicate timestamps and bad headers") {
  TempFile dup(
      "timestamp,traffic_volume,occ:a\n"
      "1514764800,10,1\n1514764800,20,2\n");
  CHECK_THROWS_WITH_AS(load_csv(dup.path), doctest::Contains("duplicate"),
                       DataError);
  TempFile badcol(
      "timestamp,traffic_volume,humidity\n"
      "1514764800,10,1\n");
  CHECK_THROWS_AS(load_csv(badcol.path), DataError);
  TempFile neg(
      "timestamp,traffic_volume,occ:a\n"
      "1514764800,-5,1\n");
  CHECK_THROWS_AS(load_csv(neg.path), DataError);
}

TEST_CASE("write_csv round-trips losslessly") {
  const TimeSeriesFrame f = make_frame(30);
  TempFile placeholder("");
  write_csv(f, placeholder.path);
  const TimeSeriesFrame g = load_csv(placeholder.path);
  CHECK(g.timestamps == f.timestamps);
  CHECK(g.traffic == f.traffic);
  CHECK(g.channels == f.channels);
}

TEST_CASE("synchronize_hourly averages sub-hourly readings") {
  TimeSeriesFrame raw;
  raw.channel_meta = {{"occ:a", ChannelKind::kOccupancy}};
  raw.timestamps = {1514764800, 1514766600, 1514768400};  // two in hour 0
  raw.channels.resize(3, 1);
  raw.channels << 10, 20, 30;
  raw.traffic.resize(3);
  raw.traffic << 10, 20, 40;
  const TimeSeriesFrame out = synchronize_hourly(raw);
  CHECK(out.rows() == 2);
  CHECK(out.traffic(0) == 15.0);
  CHECK(out.channels(0, 0) == 15.0);
  CHECK(out.traffic(1) == 40.0);
}

TEST_CASE("synchronize_hourly keeps already-hourly input unchanged") {
  const TimeSeriesFrame f = make_frame(24);
  const TimeSeriesFrame out = synchronize_hourly(f);
  CHECK(out.timestamps == f.timestamps);
  CHECK(out.channels == f.channels);
  CHECK(out.traffic == f.traffic);
}

TEST_CASE("synchronize_hourly interpolates short gaps linearly") {
  TimeSeriesFrame raw;
  raw.channel_meta = {{"occ:a", ChannelKind::kOccupancy}};
  raw.timestamps = {1514764800, 1514772000};  // 2-hour jump, one missing hour
  raw.channels.resize(2, 1);
  raw.channels << 100, 200;
  raw.traffic.resize(2);
  raw.traffic << 100, 200;
  const TimeSeriesFrame out = synchronize_hourly(raw);
  CHECK(out.rows() == 3);
  CHECK(out.traffic(1) == 150.0);
  CHECK(out.channels(1, 0) == 150.0);
  for (std::size_t i = 1; i < out.timestamps.size(); ++i)
    CHECK(out.timestamps[i] - out.timestamps[i - 1] == 3600);
}

TEST_CASE("synchronize_hourly repeats last over medium gaps, rejects > 24h") {
  TimeSeriesFrame raw;
  raw.channel_meta = {{"occ:a", ChannelKind::kOccupancy}};
  raw.timestamps = {1514764800, 1514764800 + 6 * 3600};
  raw.channels.resize(2, 1);
  raw.channels << 100, 200;
  raw.traffic.resize(2);
  raw.traffic << 10, 20;
  const TimeSeriesFrame out = synchronize_hourly(raw);
  CHECK(out.rows() == 7);
  for (Index i = 1; i < 6; ++i) CHECK(out.traffic(i) == 10.0);

  raw.timestamps[1] = 1514764800 + 26 * 3600;
  CHECK_THROWS_WITH_AS(synchronize_hourly(raw), doctest::Contains("gap"),
                       DataError);
}

TEST_CASE("fit_norm produces unit moments on the training rows") {
  const TimeSeriesFrame f = make_frame(100);
  const NormStats s = fit_norm(f, 0.7);
  const TimeSeriesFrame n = apply_norm(f, s);
  const Index train = 70;
  for (Index c = 0; c < 2; ++c) {
    const auto col = n.channels.col(c).head(train);
    CHECK(col.mean() == doctest::Approx(0.0).epsilon(1e-10));
    const double var =
        (col.array() - col.mean()).square().sum() / (train - 1);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("invert_norm is the inverse of apply_norm") {
  const TimeSeriesFrame f = make_frame(50);
  const NormStats s = fit_norm(f, 0.7);
  const TimeSeriesFrame back = invert_norm(apply_norm(f, s), s);
  CHECK((back.traffic - f.traffic).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((back.channels - f.channels).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("norm stats depend only on the training split") {
  TimeSeriesFrame a = make_frame(100);
  TimeSeriesFrame b = a;
  b.traffic.tail(20).setConstant(9999.0);  // perturb test rows only
  b.channels.bottomRows(20).setConstant(-1.0);
  const NormStats sa = fit_norm(a, 0.7);
  const NormStats sb = fit_norm(b, 0.7);
  CHECK(sa.traffic_mean == sb.traffic_mean);
  CHECK(sa.traffic_std == sb.traffic_std);
  CHECK(sa.channel_mean == sb.channel_mean);
  CHECK(sa.channel_std == sb.channel_std);
}

TEST_CASE("fit_norm rejects zero-variance channels by name") {
  TimeSeriesFrame f = make_frame(40);
  f.channels.col(1).setConstant(7.0);
  CHECK_THROWS_WITH_AS(fit_norm(f, 1.0), doctest::Contains("env:b"),
                       DataError);
}

TEST_CASE("chronological_split honors the 70/10/20 ratios") {
  const TimeSeriesFrame f = make_frame(100);
  const SplitFrames s = chronological_split(f);
  CHECK(s.train.rows() == 70);
  CHECK(s.validation.rows() == 10);
  CHECK(s.test.rows() == 20);

  const TimeSeriesFrame tiny = make_frame(10);
  const SplitFrames st = chronological_split(tiny);
  CHECK(st.train.rows() == 7);
  CHECK(st.validation.rows() == 1);
  CHECK(st.test.rows() == 2);

  CHECK_THROWS_AS(chronological_split(make_frame(9)), DataError);
}

TEST_CASE("split concatenation reproduces the frame") {
  const TimeSeriesFrame f = make_frame(83);
  const SplitFrames s = chronological_split(f);
  CHECK(s.train.rows() + s.validation.rows() + s.test.rows() == f.rows());
  Index row = 0;
  for (const TimeSeriesFrame* part : {&s.train, &s.validation, &s.test}) {
    for (Index i = 0; i < part->rows(); ++i, ++row) {
      CHECK(part->timestamps[static_cast<std::size_t>(i)] ==
            f.timestamps[static_cast<std::size_t>(row)]);
      CHECK(part->traffic(i) == f.traffic(row));
    }
  }
}

TEST_CASE("make_windows counts match formula and enumeration") {
  SUBCASE("hand cases") {
    CHECK(make_windows(make_frame(10), 6, 1).size() == 5);
    CHECK(make_windows(make_frame(6), 6, 1).size() == 1);  // minimal
    CHECK_THROWS_AS(make_windows(make_frame(5), 6, 1), DataError);
    CHECK_THROWS_AS(make_windows(make_frame(10), 0, 1), ConfigError);
  }
  SUBCASE("formula equals brute force over lengths 1..50") {
    for (Index len = 1; len <= 50; ++len) {
      const TimeSeriesFrame f = make_frame(len);
      for (Index L : {2, 4, 6}) {
        for (Index tau : {1, 3}) {
          // Brute-force enumeration of valid anchors.
          Index expected = 0;
          for (Index t = 0; t < len; ++t)
            if (t >= L - 1 && t + tau - 1 < len) ++expected;
          if (len < L + tau - 1) {
            CHECK_THROWS_AS(make_windows(f, L, tau), DataError);
          } else {
            const auto windows = make_windows(f, L, tau);
            CHECK(static_cast<Index>(windows.size()) == expected);
            CHECK(static_cast<Index>(windows.size()) == len - L - tau + 2);
          }
        }
      }
    }
  }
}

TEST_CASE("window alignment pairs hist and labels with the right hours") {
  const TimeSeriesFrame f = make_frame(30);
  const Index L = 6, tau = 2;
  const auto windows = make_windows(f, L, tau);
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const Index t = L - 1 + static_cast<Index>(w);  // anchor row
    const auto& win = windows[w];
    CHECK(win.anchor == f.timestamps[static_cast<std::size_t>(t)]);
    for (Index k = 0; k < L - 1; ++k)
      CHECK(win.hist(k) == f.traffic(t - L + 1 + k));
    for (Index k = 0; k < tau; ++k)
      CHECK(win.label(k) == f.traffic(t + k));
    for (Index k = 0; k < L; ++k)
      CHECK(win.exo(k, 0) == f.channels(t - L + 1 + k, 0));
  }
}

TEST_CASE("un-normalized labels equal the original traffic at anchor hours") {
  const TimeSeriesFrame f = make_frame(40);
  const NormStats s = fit_norm(f, 0.7);
  const TimeSeriesFrame n = apply_norm(f, s);
  const auto windows = make_windows(n, 6, 1);
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const Index t = 5 + static_cast<Index>(w);
    const Vector raw = invert_norm_traffic(windows[w].label, s);
    CHECK(raw(0) == doctest::Approx(f.traffic(t)).epsilon(1e-12));
  }
}
