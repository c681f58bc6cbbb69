#pragma once

#include <array>
#include <string>
#include <vector>

#include "bsx/dataset.hpp"
#include "bsx/metrics.hpp"
#include "bsx/model.hpp"
#include "bsx/training.hpp"

namespace bsx {

// Mean traffic per (day-of-week, hour) slot.
class HistoricalAverage {
 public:
  static HistoricalAverage fit(const TimeSeriesFrame& frame,
                               int utc_offset_hours = 0);
  double predict(std::int64_t timestamp) const;  // throws on an empty slot

 private:
  std::array<std::array<double, 24>, 7> sum_{};
  std::array<std::array<Index, 24>, 7> count_{};
  int utc_offset_hours_ = 0;
};

// AR(p) on the d-times differenced series, fitted by conditional least
// squares; no moving-average terms.
struct ArimaModel {
  Index p = 3;
  Index d = 1;
  Vector coeffs;  // [phi_1..phi_p, intercept]

  static ArimaModel fit(const Vector& series, Index p, Index d);
  // Forecast `steps` values following `recent` (latest value last).
  Vector forecast(const Vector& recent, Index steps) const;
};

// Least-squares vector autoregression over all series jointly.
struct VarModel {
  Index lag = 24;
  Matrix coeffs;  // dim x (dim*lag + 1); row = [lag-1 block .. lag-L block, c]

  static VarModel fit(const Matrix& series, Index lag);  // series is T x dim
  // One-step-ahead forecast from the last `lag` rows (latest last).
  Vector forecast_step(const Matrix& recent) const;
};

// Gaussian-kernel locally weighted linear regression on building features.
struct LwrModel {
  Matrix features;  // train rows (normalized channels)
  Vector targets;   // raw traffic
  double bandwidth = 1.0;

  double predict(const Vector& query) const;
  static double select_bandwidth(const LwrModel& base, const Matrix& val_features,
                                 const Vector& val_targets,
                                 const std::vector<double>& candidates);
};

struct BaselineSpec {
  Index arima_p = 3;
  Index arima_d = 1;
  Index var_lag = 24;
  std::vector<double> lwr_bandwidths;  // multiples of sqrt(feature dim)

  static BaselineSpec defaults();
};

struct EvalContext {
  std::string road;
  ModelConfig model_cfg;
  TrainConfig train_cfg;
  BaselineSpec baselines = BaselineSpec::defaults();
  Index horizon = 1;
  int utc_offset_hours = 0;
};

// Registry names accepted by `evaluate --models`.
const std::vector<std::string>& known_models();

// Fit the named predictor on the frame's chronological train split and score
// it on the test split at ctx.horizon. RNN baselines are model-module
// configurations: seq2seq drops both attentions, seq2seq-attn drops the
// cross-domain one.
EvalEntry evaluate_named_model(const std::string& name,
                               const TimeSeriesFrame& frame,
                               const EvalContext& ctx);

}  // namespace bsx
