#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsx/checkpoint.hpp"
#include "bsx/dataset.hpp"
#include "bsx/model.hpp"

namespace bsx {

struct TrainConfig {
  Index batch_size = 256;
  double learning_rate = 0.001;
  double dropout_rate = 0.2;
  Index max_epochs = 2500;
  std::uint64_t seed = 42;
  Index patience = 50;  // epochs without validation improvement
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;  // global gradient-norm clip
  Index stride = 1;        // training window stride

  void validate() const;
};

struct TrainReport {
  std::vector<double> train_loss;  // per epoch, normalized units
  std::vector<double> val_loss;
  Index best_epoch = 0;  // 0-based index into the loss curves
  double best_val_loss = 0.0;
  Index epochs_run = 0;
  double wall_seconds = 0.0;

  std::string to_json() const;
};

double mse_loss(const Vector& pred, const Vector& truth);

// First/second moment estimates per parameter, in registration order.
struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::int64_t step = 0;
};

// One Adam update with bias correction. `names` label parameters in abort
// messages when a gradient goes nonfinite.
void adam_step(const std::vector<Matrix*>& params,
               const std::vector<Matrix>& grads,
               const std::vector<std::string>& names, AdamState& state,
               const TrainConfig& cfg);

struct TrainResult {
  Checkpoint checkpoint;
  TrainReport report;
};

// Full training pipeline on one hourly frame: chronological split, train-only
// normalization, windowing, seeded shuffled mini-batches with teacher forcing
// and dropout, best-validation checkpoint selection, early stopping.
TrainResult train(const TimeSeriesFrame& frame, const ModelConfig& model_cfg,
                  const TrainConfig& train_cfg);

}  // namespace bsx
