#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bsx/dataset.hpp"

namespace bsx {

// One calendar day of total building occupancy and traffic volume.
struct DayVectors {
  Vector building;  // 24 hourly values
  Vector traffic;   // 24 hourly values
  std::int64_t day_start = 0;
};

struct RouteSet {
  std::vector<std::vector<std::string>> routes;  // segment ids per route
};

enum class Grouping { kWeekdayWeekend, kRushNormal };

struct GroupStats {
  double cosine_mean = 0.0;
  double cosine_std = 0.0;
  double pearson_mean = 0.0;
  double pearson_std = 0.0;
  Index days = 0;
};

struct GroupedReport {
  // Keys: "weekday"/"weekend" or "rush"/"normal".
  std::map<std::string, GroupStats> groups;
  Index skipped_days = 0;  // incomplete or degenerate days, not imputed
};

double cosine(const Vector& b, const Vector& t);

// Per-day cosine similarity; a zero-norm day yields NaN rather than failing
// the whole batch.
std::vector<double> cosine_daily(const std::vector<DayVectors>& days);

// Pearson correlation coefficient over one interval (default framing: one
// day, 24 samples). Throws on constant input.
double pearson(const Vector& b, const Vector& t);

// Split the frame into full local days (UTC shifted by utc_offset_hours);
// building = sum of occupancy channels.
std::vector<DayVectors> extract_days(const TimeSeriesFrame& frame,
                                     int utc_offset_hours = 0);

// Hours counted as rush: [7,10) and [16,19) local.
std::vector<int> default_rush_hours();

GroupedReport grouped_similarity(const TimeSeriesFrame& frame,
                                 Grouping grouping,
                                 const std::vector<int>& rush_hours =
                                     default_rush_hours(),
                                 int utc_offset_hours = 0);

// Fraction of routes that traverse each segment; a segment repeated inside
// one route counts once.
std::map<std::string, double> passing_probability(const RouteSet& routes);

// One route per line, comma-separated segment identifiers.
RouteSet load_routes(const std::string& path);

}  // namespace bsx
