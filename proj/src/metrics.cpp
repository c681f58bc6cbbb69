#include "bsx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <set>

#include "bsx/errors.hpp"

namespace bsx {

namespace {

void check_lengths(const Vector& pred, const Vector& truth, const char* op) {
  if (pred.size() != truth.size())
    throw NumericError(std::string(op) + ": length mismatch, " +
                       std::to_string(pred.size()) + " vs " +
                       std::to_string(truth.size()));
  if (pred.size() == 0)
    throw NumericError(std::string(op) + ": empty input");
}

}  // namespace

double mae(const Vector& pred, const Vector& truth) {
  check_lengths(pred, truth, "mae");
  return (pred - truth).cwiseAbs().mean();
}

double rmse(const Vector& pred, const Vector& truth) {
  check_lengths(pred, truth, "rmse");
  return std::sqrt((pred - truth).squaredNorm() /
                   static_cast<double>(pred.size()));
}

MapeResult mape(const Vector& pred, const Vector& truth) {
  check_lengths(pred, truth, "mape");
  MapeResult out;
  double total = 0.0;
  Index used = 0;
  for (Index i = 0; i < truth.size(); ++i) {
    if (truth(i) == 0.0) {
      ++out.excluded;
      continue;
    }
    total += std::abs((truth(i) - pred(i)) / truth(i));
    ++used;
  }
  if (used == 0)
    throw NumericError("mape: every ground-truth value is zero");
  out.percent = 100.0 * total / static_cast<double>(used);
  return out;
}

std::string format_percent(double percent) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", percent);
  return buf;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["config_fingerprint"] = config_fingerprint;
  j["tool_version"] = tool_version;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : entries) {
    j["entries"].push_back({
        {"model", e.model},
        {"road", e.road},
        {"horizon", e.horizon},
        {"mae", e.mae},
        {"rmse", e.rmse},
        {"mape_percent", e.mape_percent},
        {"samples", e.samples},
        {"mape_excluded", e.mape_excluded},
    });
  }
  return j.dump(2);
}

std::string EvalReport::to_csv() const {
  // Preserve first-seen order for both axes.
  std::vector<std::string> models, roads;
  auto remember = [](std::vector<std::string>& seen, const std::string& v) {
    if (std::find(seen.begin(), seen.end(), v) == seen.end())
      seen.push_back(v);
  };
  for (const auto& e : entries) {
    remember(models, e.model);
    remember(roads, e.road);
  }

  std::string out = "model";
  for (const auto& r : roads)
    out += "," + r + " RMSE," + r + " MAE," + r + " MAPE";
  out += "\n";
  char buf[64];
  for (const auto& m : models) {
    out += m;
    for (const auto& r : roads) {
      const EvalEntry* found = nullptr;
      for (const auto& e : entries)
        if (e.model == m && e.road == r) {
          found = &e;
          break;
        }
      if (!found) {
        out += ",,,";
        continue;
      }
      std::snprintf(buf, sizeof(buf), ",%.2f,%.2f,", found->rmse, found->mae);
      out += buf;
      out += format_percent(found->mape_percent);
    }
    out += "\n";
  }
  return out;
}

}  // namespace bsx
