#pragma once

#include <string>
#include <vector>

#include "bsx/tensor.hpp"

namespace bsx {

double mae(const Vector& pred, const Vector& truth);
double rmse(const Vector& pred, const Vector& truth);

struct MapeResult {
  double percent = 0.0;
  Index excluded = 0;  // hours with zero recorded volume, left out of the mean
};

MapeResult mape(const Vector& pred, const Vector& truth);

// One (model, road, horizon) row of an evaluation, on de-normalized values.
struct EvalEntry {
  std::string model;
  std::string road;
  Index horizon = 1;
  double mae = 0.0;
  double rmse = 0.0;
  double mape_percent = 0.0;
  Index samples = 0;
  Index mape_excluded = 0;
};

struct EvalReport {
  std::vector<EvalEntry> entries;
  std::string config_fingerprint;
  std::string tool_version;

  std::string to_json() const;
  // Rows = models, a RMSE/MAE/MAPE column triplet per road.
  std::string to_csv() const;
};

std::string format_percent(double percent);  // e.g. "2.05%"

}  // namespace bsx
