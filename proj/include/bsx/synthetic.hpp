#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsx/dataset.hpp"

namespace bsx {

// Controls for the seeded building/traffic generator. Everything stochastic
// is a pure function of (seed, stream, counter), so a config reproduces the
// same frame bit for bit on any platform.
struct GenConfig {
  Index days = 28;
  Index zones = 3;         // occupancy channels
  Index env_channels = 4;  // cycle of co2, aqi, temp, rain
  double coupling = 0.8;   // in [0, 1]
  Index lag_hours = 0;     // occupancy-change -> traffic-response offset
  double noise_std = 0.05; // relative noise level; 0 disables all noise
  std::uint64_t seed = 42;
  double base_volume = 900.0;  // vehicles/hour scale of the diurnal base
  std::string road = "road-a"; // only the traffic noise stream depends on it
};

TimeSeriesFrame generate(const GenConfig& config);

struct NamedFrame {
  std::string name;
  GenConfig config;
  TimeSeriesFrame frame;
};

// Four roads sharing one building (identical building channels), with
// monotonically decreasing building-traffic coupling from road-a to road-d.
std::vector<NamedFrame> benchmark_suite(std::uint64_t seed, Index days = 90);

}  // namespace bsx
