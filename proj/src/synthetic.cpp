#include "bsx/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "bsx/errors.hpp"
#include "bsx/prng.hpp"

namespace bsx {

namespace {

// 2018-01-01 00:00 UTC, a Monday; keeps day-of-week arithmetic trivial.
constexpr std::int64_t kStartEpoch = 1514764800;

// PRNG stream ids (part of the reproducibility contract).
enum Stream : std::uint64_t {
  kDayAmplitude = 0,
  kTrafficDayJitter = 1,
  kZoneWeight = 10,     // + zone index
  kZoneNoise = 40,      // + zone index
  kCorruptPick = 70,
  kCorruptNoise = 80,   // + zone index
  kEnvNoise = 100,      // + env channel index
  kRainEvent = 150,
  kTrafficNoise = 200,  // + (fnv1a(road) & 0xff)
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double gauss_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double bump(double h, double center, double width) {
  const double z = (h - center) / width;
  return std::exp(-0.5 * z * z);
}

bool is_weekend(Index day) { return day % 7 >= 5; }

// Normalized in-building presence over the day: rise around 9h, fall around
// 17h.
double plateau(double h) {
  return gauss_cdf((h - 9.0) / 1.5) - gauss_cdf((h - 17.0) / 1.5);
}

double weekday_base(double h) {
  return 0.12 + 0.42 * bump(h, 9.0, 1.9) + 0.52 * bump(h, 17.2, 2.1) +
         0.32 * bump(h, 13.0, 3.2);
}

double weekend_base(double h) {
  return 0.12 + 0.40 * bump(h, 16.5, 2.6);
}

}  // namespace

TimeSeriesFrame generate(const GenConfig& cfg) {
  if (cfg.days < 1) throw ConfigError("generate: days must be >= 1");
  if (cfg.zones < 1) throw ConfigError("generate: zones must be >= 1");
  if (cfg.env_channels < 0)
    throw ConfigError("generate: env_channels must be >= 0");
  if (cfg.coupling < 0.0 || cfg.coupling > 1.0)
    throw ConfigError("generate: coupling must be in [0, 1]");
  if (cfg.noise_std < 0.0)
    throw ConfigError("generate: noise_std must be >= 0");
  if (cfg.lag_hours < 0)
    throw ConfigError("generate: lag_hours must be >= 0");

  const Index n = cfg.days * 24;
  const std::uint64_t seed = cfg.seed;
  const double ns = cfg.noise_std;

  // Per-day occupancy amplitude (structure, not noise: visible in the data).
  std::vector<double> day_amp(static_cast<std::size_t>(cfg.days));
  for (Index d = 0; d < cfg.days; ++d) {
    const double u = rng::uniform(seed, kDayAmplitude, static_cast<std::uint64_t>(d));
    const double base = 0.85 + 0.30 * u;
    day_amp[static_cast<std::size_t>(d)] = is_weekend(d) ? 0.15 * base : base;
  }

  // Per-day zone activity weights, normalized to sum to 1.
  Matrix zone_w(cfg.days, cfg.zones);
  for (Index d = 0; d < cfg.days; ++d) {
    double total = 0.0;
    for (Index z = 0; z < cfg.zones; ++z) {
      const double u = rng::uniform(seed, kZoneWeight + static_cast<std::uint64_t>(z),
                                    static_cast<std::uint64_t>(d));
      zone_w(d, z) = 0.15 + u;
      total += zone_w(d, z);
    }
    zone_w.row(d) /= total;
  }

  // One zone per day reports with degraded quality; sensors misbehave.
  std::vector<Index> corrupt_zone(static_cast<std::size_t>(cfg.days));
  for (Index d = 0; d < cfg.days; ++d)
    corrupt_zone[static_cast<std::size_t>(d)] = static_cast<Index>(
        rng::bits(seed, kCorruptPick, static_cast<std::uint64_t>(d)) %
        static_cast<std::uint64_t>(cfg.zones));

  // Clean total presence level and its hour-to-hour flow magnitude; the
  // traffic coupling term is built from these, so traffic stays a
  // deterministic function of the (clean) occupancy series.
  Vector level(n), flow(n);
  for (Index t = 0; t < n; ++t) {
    const Index d = t / 24;
    const double h = static_cast<double>(t % 24);
    level(t) = day_amp[static_cast<std::size_t>(d)] * plateau(h);
  }
  flow(0) = 0.0;
  for (Index t = 1; t < n; ++t) flow(t) = std::abs(level(t) - level(t - 1));
  const double flow_scale = 0.26;  // ~max hourly change of the plateau

  // The traffic response to building activity is spread over a few hours
  // (people reach the road over time), so the coupling term convolves the
  // occupancy level/flow mix with a short decaying kernel starting at
  // lag_hours.
  constexpr Index kKernelTaps = 6;
  constexpr double kResponseKernel[kKernelTaps] = {0.35, 0.25, 0.18,
                                                   0.12, 0.07, 0.03};
  auto mix_at = [&](Index t) {
    const Index i = std::max<Index>(0, t);
    return 0.8 * level(i) + 0.2 * flow(i) / flow_scale;
  };
  auto signal_at = [&](Index t) {
    double acc = 0.0;
    for (Index k = 0; k < kKernelTaps; ++k)
      acc += kResponseKernel[k] * mix_at(t - cfg.lag_hours - k);
    return acc;
  };
  // Road-independent load proxy; building channels must not depend on any
  // road's coupling or lag.
  auto city_signal = [&](Index t) { return mix_at(t); };

  TimeSeriesFrame frame;
  frame.timestamps.resize(static_cast<std::size_t>(n));
  for (Index t = 0; t < n; ++t)
    frame.timestamps[static_cast<std::size_t>(t)] = kStartEpoch + t * 3600;

  const Index n_channels = cfg.zones + cfg.env_channels;
  frame.channels.resize(n, n_channels);
  frame.channel_meta.resize(static_cast<std::size_t>(n_channels));
  frame.traffic.resize(n);

  // Occupancy zones. Camera counting degrades while people move through in
  // bulk, so sensing noise scales with the churn (flow) level; one zone per
  // day additionally reports with degraded quality.
  const double occupancy_scale = 2500.0;
  for (Index z = 0; z < cfg.zones; ++z) {
    frame.channel_meta[static_cast<std::size_t>(z)] = {
        "occ:zone" + std::to_string(z + 1), ChannelKind::kOccupancy};
    for (Index t = 0; t < n; ++t) {
      const Index d = t / 24;
      const double churn = std::min(1.0, flow(t) / flow_scale);
      double sigma = ns * (1.0 + 5.0 * churn);
      const bool corrupted = corrupt_zone[static_cast<std::size_t>(d)] == z;
      if (corrupted) sigma *= 3.0;
      const double g = rng::normal(seed, kZoneNoise + static_cast<std::uint64_t>(z),
                                   static_cast<std::uint64_t>(t));
      const double mult = std::exp(sigma * g - 0.5 * sigma * sigma);
      double v = 8.0 + occupancy_scale * zone_w(d, z) * level(t) * mult;
      if (corrupted && ns > 0.0) {
        const double spike = rng::uniform(
            seed, kCorruptNoise + static_cast<std::uint64_t>(z),
            static_cast<std::uint64_t>(t));
        if (spike < 0.08) v += occupancy_scale * 0.35 * spike / 0.08;
      }
      frame.channels(t, z) = std::max(0.0, v);
    }
  }

  // Environmental channels cycle through four kinds.
  const char* kind_names[4] = {"co2", "aqi", "temp", "rain"};
  for (Index e = 0; e < cfg.env_channels; ++e) {
    const Index kind = e % 4;
    std::string name = std::string("env:") + kind_names[kind];
    if (e >= 4) name += "_" + std::to_string(e / 4 + 1);
    frame.channel_meta[static_cast<std::size_t>(cfg.zones + e)] = {
        name, ChannelKind::kEnvironmental};
    const std::uint64_t stream = kEnvNoise + static_cast<std::uint64_t>(e);
    const double detune = 1.0 + 0.05 * static_cast<double>(e / 4);

    double ar = 0.0;  // AR(1) state for the aqi kind
    for (Index t = 0; t < n; ++t) {
      const double h = static_cast<double>(t % 24);
      double v = 0.0;
      switch (kind) {
        case 0: {  // co2 tracks total occupancy with a one-hour lag
          const double lvl = level(std::max<Index>(0, t - 1));
          const double g = rng::normal(seed, stream, static_cast<std::uint64_t>(t));
          v = 420.0 + 260.0 * detune * lvl + 25.0 * ns * g;
          break;
        }
        case 1: {  // aqi anti-correlates with traffic load
          const double proxy =
              0.5 * (is_weekend(t / 24) ? weekend_base(h) : weekday_base(h)) +
              0.5 * city_signal(t);
          const double g = rng::normal(seed, stream, static_cast<std::uint64_t>(t));
          ar = 0.9 * ar + 8.0 * ns * g;
          v = std::max(3.0, 70.0 - 42.0 * detune * proxy + ar);
          break;
        }
        case 2: {  // diurnal temperature with a slow seasonal drift
          const double g = rng::normal(seed, stream, static_cast<std::uint64_t>(t));
          v = 15.0 + 7.0 * std::sin(2.0 * M_PI * (h - 8.5) / 24.0) +
              2.0 * std::sin(2.0 * M_PI * static_cast<double>(t) / (24.0 * 365.0)) +
              1.5 * ns * g;
          break;
        }
        case 3: {  // sparse nonnegative rainfall
          const double u = rng::uniform(seed, kRainEvent + static_cast<std::uint64_t>(e),
                                        static_cast<std::uint64_t>(t));
          v = (u < 0.03) ? 0.4 + 6.0 * (u / 0.03) : 0.0;
          break;
        }
      }
      frame.channels(t, cfg.zones + e) = v;
    }
  }

  // Traffic: diurnal base + coupled occupancy signal, multiplicative noise.
  const std::uint64_t traffic_stream = kTrafficNoise + (fnv1a(cfg.road) & 0xff);
  for (Index t = 0; t < n; ++t) {
    const Index d = t / 24;
    const double h = static_cast<double>(t % 24);
    const double base = is_weekend(d) ? weekend_base(h) : weekday_base(h);
    const double jitter =
        1.0 + 0.6 * ns * (2.0 * rng::uniform(seed, kTrafficDayJitter,
                                             static_cast<std::uint64_t>(d)) -
                          1.0);
    double v = cfg.base_volume * base * jitter +
               cfg.coupling * 0.85 * cfg.base_volume * signal_at(t);
    const double g = rng::normal(seed, traffic_stream, static_cast<std::uint64_t>(t));
    v *= std::exp(ns * g - 0.5 * ns * ns);
    frame.traffic(t) = std::max(0.0, v);
  }
  return frame;
}

std::vector<NamedFrame> benchmark_suite(std::uint64_t seed, Index days) {
  struct RoadSpec {
    const char* name;
    double coupling;
    Index lag;
    double base_volume;
  };
  const RoadSpec roads[4] = {
      {"road-a", 0.9, 0, 900.0},
      {"road-b", 0.7, 1, 1100.0},
      {"road-c", 0.5, 1, 700.0},
      {"road-d", 0.3, 2, 1000.0},
  };
  std::vector<NamedFrame> out;
  for (const RoadSpec& r : roads) {
    GenConfig cfg;
    cfg.days = days;
    cfg.seed = seed;
    cfg.coupling = r.coupling;
    cfg.lag_hours = r.lag;
    cfg.base_volume = r.base_volume;
    cfg.road = r.name;
    out.push_back({r.name, cfg, generate(cfg)});
  }
  return out;
}

}  // namespace bsx
