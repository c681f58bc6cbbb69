#include "bsx/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "bsx/errors.hpp"

namespace bsx {

namespace {

bool is_weekend_epoch(std::int64_t local_ts) {
  const std::int64_t daynum = local_ts / 86400;
  return (daynum + 3) % 7 >= 5;  // epoch day 0 was a Thursday
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  double s = 0.0;
  for (double x : xs) s += x;
  out.mean = s / static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - out.mean) * (x - out.mean);
  out.std = xs.size() > 1 ? std::sqrt(v / static_cast<double>(xs.size() - 1))
                          : 0.0;
  return out;
}

}  // namespace

double cosine(const Vector& b, const Vector& t) {
  if (b.size() != t.size())
    throw NumericError("cosine: length mismatch, " + std::to_string(b.size()) +
                       " vs " + std::to_string(t.size()));
  const double nb = b.norm();
  const double nt = t.norm();
  if (!(nb > 0.0) || !(nt > 0.0))
    throw NumericError("cosine: zero-norm vector");
  return b.dot(t) / (nb * nt);
}

std::vector<double> cosine_daily(const std::vector<DayVectors>& days) {
  std::vector<double> out;
  out.reserve(days.size());
  for (const auto& d : days) {
    const double nb = d.building.norm();
    const double nt = d.traffic.norm();
    if (!(nb > 0.0) || !(nt > 0.0)) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    out.push_back(d.building.dot(d.traffic) / (nb * nt));
  }
  return out;
}

double pearson(const Vector& b, const Vector& t) {
  if (b.size() != t.size())
    throw NumericError("pearson: length mismatch, " +
                       std::to_string(b.size()) + " vs " +
                       std::to_string(t.size()));
  if (b.size() < 2) throw NumericError("pearson: need at least 2 samples");
  const double bm = b.mean();
  const double tm = t.mean();
  double num = 0.0, db = 0.0, dt = 0.0;
  for (Index i = 0; i < b.size(); ++i) {
    num += (b(i) - bm) * (t(i) - tm);
    db += (b(i) - bm) * (b(i) - bm);
    dt += (t(i) - tm) * (t(i) - tm);
  }
  if (!(db > 0.0) || !(dt > 0.0))
    throw NumericError("pearson: undefined correlation for constant input");
  return num / std::sqrt(db * dt);
}

std::vector<DayVectors> extract_days(const TimeSeriesFrame& frame,
                                     int utc_offset_hours) {
  const auto occ = frame.occupancy_columns();
  if (occ.empty())
    throw DataError("extract_days: frame has no occupancy channels");
  std::vector<DayVectors> out;
  const std::int64_t off = static_cast<std::int64_t>(utc_offset_hours) * 3600;
  Index i = 0;
  while (i < frame.rows()) {
    const std::int64_t local = frame.timestamps[static_cast<std::size_t>(i)] + off;
    if (local % 86400 != 0) {
      ++i;
      continue;
    }
    if (i + 24 > frame.rows()) break;
    bool contiguous = true;
    for (Index k = 1; k < 24; ++k)
      if (frame.timestamps[static_cast<std::size_t>(i + k)] -
              frame.timestamps[static_cast<std::size_t>(i + k - 1)] !=
          3600) {
        contiguous = false;
        break;
      }
    if (!contiguous) {
      ++i;
      continue;
    }
    DayVectors d;
    d.day_start = local;
    d.building = Vector::Zero(24);
    d.traffic.resize(24);
    for (Index k = 0; k < 24; ++k) {
      for (Index c : occ) d.building(k) += frame.channels(i + k, c);
      d.traffic(k) = frame.traffic(i + k);
    }
    out.push_back(std::move(d));
    i += 24;
  }
  return out;
}

std::vector<int> default_rush_hours() { return {7, 8, 9, 16, 17, 18}; }

GroupedReport grouped_similarity(const TimeSeriesFrame& frame,
                                 Grouping grouping,
                                 const std::vector<int>& rush_hours,
                                 int utc_offset_hours) {
  if (frame.rows() < 7 * 24)
    throw DataError("grouped_similarity: frame must span at least one week");
  const auto days = extract_days(frame, utc_offset_hours);

  std::map<std::string, std::vector<double>> cos_vals, pea_vals;
  Index skipped = 0;

  auto add_pair = [&](const std::string& group, const Vector& b,
                      const Vector& t) {
    const double nb = b.norm(), nt = t.norm();
    const double bv = (b.array() - b.mean()).square().sum();
    const double tv = (t.array() - t.mean()).square().sum();
    if (!(nb > 0.0) || !(nt > 0.0) || !(bv > 0.0) || !(tv > 0.0)) {
      ++skipped;
      return;
    }
    cos_vals[group].push_back(cosine(b, t));
    pea_vals[group].push_back(pearson(b, t));
  };

  if (grouping == Grouping::kWeekdayWeekend) {
    for (const auto& d : days)
      add_pair(is_weekend_epoch(d.day_start) ? "weekend" : "weekday",
               d.building, d.traffic);
  } else {
    std::set<int> rush(rush_hours.begin(), rush_hours.end());
    for (const auto& d : days) {
      std::vector<double> rb, rt, nb, nt;
      for (Index h = 0; h < 24; ++h) {
        if (rush.count(static_cast<int>(h))) {
          rb.push_back(d.building(h));
          rt.push_back(d.traffic(h));
        } else {
          nb.push_back(d.building(h));
          nt.push_back(d.traffic(h));
        }
      }
      auto to_vec = [](const std::vector<double>& v) {
        Vector out(static_cast<Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i)
          out(static_cast<Index>(i)) = v[i];
        return out;
      };
      add_pair("rush", to_vec(rb), to_vec(rt));
      add_pair("normal", to_vec(nb), to_vec(nt));
    }
  }

  GroupedReport report;
  report.skipped_days = skipped;
  const std::vector<std::string> expected =
      grouping == Grouping::kWeekdayWeekend
          ? std::vector<std::string>{"weekday", "weekend"}
          : std::vector<std::string>{"rush", "normal"};
  for (const auto& g : expected) {
    auto it = cos_vals.find(g);
    if (it == cos_vals.end() || it->second.empty())
      throw DataError("grouped_similarity: empty group '" + g + "'");
    GroupStats s;
    const auto cs = mean_std(it->second);
    const auto ps = mean_std(pea_vals[g]);
    s.cosine_mean = cs.mean;
    s.cosine_std = cs.std;
    s.pearson_mean = ps.mean;
    s.pearson_std = ps.std;
    s.days = static_cast<Index>(it->second.size());
    report.groups[g] = s;
  }
  return report;
}

std::map<std::string, double> passing_probability(const RouteSet& routes) {
  if (routes.routes.empty())
    throw DataError("passing_probability: empty route set");
  std::map<std::string, Index> counts;
  for (const auto& route : routes.routes) {
    if (route.empty())
      throw DataError("passing_probability: empty route");
    std::set<std::string> seen(route.begin(), route.end());
    for (const auto& seg : seen) counts[seg] += 1;
  }
  std::map<std::string, double> out;
  const double total = static_cast<double>(routes.routes.size());
  for (const auto& [seg, c] : counts)
    out[seg] = static_cast<double>(c) / total;
  return out;
}

RouteSet load_routes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open route file " + path);
  RouteSet rs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string> segs;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
      auto b = cell.find_first_not_of(" \t\r");
      auto e = cell.find_last_not_of(" \t\r");
      if (b == std::string::npos) continue;
      segs.push_back(cell.substr(b, e - b + 1));
    }
    if (segs.empty()) continue;  // blank line
    rs.routes.push_back(std::move(segs));
  }
  if (rs.routes.empty())
    throw DataError(path + ": no routes found");
  return rs;
}

}  // namespace bsx
