#include "bsx/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <json.hpp>

#include "bsx/errors.hpp"
#include "bsx/prng.hpp"

namespace bsx {

namespace {

// PRNG streams owned by the training loop.
constexpr std::uint64_t kShuffleStream = 2000;  // + epoch
constexpr std::uint64_t kDropoutStream = 3000;  // + epoch

std::vector<Matrix> dropout_masks(RandomStream& rs, Index count, Index size,
                                  double rate) {
  std::vector<Matrix> masks;
  masks.reserve(static_cast<std::size_t>(count));
  const double keep = 1.0 - rate;
  for (Index i = 0; i < count; ++i) {
    Matrix m(size, 1);
    for (Index j = 0; j < size; ++j)
      m(j, 0) = rs.uniform() < keep ? 1.0 / keep : 0.0;
    masks.push_back(std::move(m));
  }
  return masks;
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(learning_rate >= 0.0))
    throw ConfigError("train: learning_rate must be >= 0");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    throw ConfigError("train: dropout_rate must be in [0, 1)");
  if (max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
  if (patience < 1) throw ConfigError("train: patience must be >= 1");
  if (stride < 1) throw ConfigError("train: stride must be >= 1");
}

double mse_loss(const Vector& pred, const Vector& truth) {
  if (pred.size() != truth.size())
    throw NumericError("mse_loss: length mismatch, " +
                       std::to_string(pred.size()) + " vs " +
                       std::to_string(truth.size()));
  if (pred.size() == 0) throw NumericError("mse_loss: empty input");
  return (pred - truth).squaredNorm() / static_cast<double>(pred.size());
}

void adam_step(const std::vector<Matrix*>& params,
               const std::vector<Matrix>& grads,
               const std::vector<std::string>& names, AdamState& state,
               const TrainConfig& cfg) {
  if (params.size() != grads.size())
    throw NumericError("adam_step: parameter/gradient count mismatch");
  if (state.m.empty()) {
    for (const Matrix* p : params) {
      state.m.push_back(Matrix::Zero(p->rows(), p->cols()));
      state.v.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double corr1 = 1.0 - std::pow(cfg.beta1, t);
  const double corr2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& g = grads[i];
    if (!all_finite(g)) {
      const std::string name =
          i < names.size() ? names[i] : "#" + std::to_string(i);
      throw NumericError("adam_step: nonfinite gradient for parameter " +
                         name);
    }
    Matrix& m = state.m[i];
    Matrix& v = state.v[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    const Matrix m_hat = m / corr1;
    const Matrix v_hat = v / corr2;
    *params[i] -= cfg.learning_rate *
                  (m_hat.array() / (v_hat.array().sqrt() + cfg.epsilon))
                      .matrix();
  }
}

namespace {

struct PreparedSample {
  Matrix exo_occ;
  Matrix exo_env;
  Vector hist;
  double label;
};

std::vector<PreparedSample> prepare(const std::vector<SampleWindow>& windows,
                                    const std::vector<Index>& occ_cols,
                                    const std::vector<Index>& env_cols) {
  std::vector<PreparedSample> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    auto [occ, env] = split_exo(w.exo, occ_cols, env_cols);
    out.push_back({std::move(occ), std::move(env), w.hist, w.label(0)});
  }
  return out;
}

double eval_loss(const std::vector<PreparedSample>& samples,
                 const ModelParams& params, const ModelConfig& cfg) {
  double total = 0.0;
  for (const auto& s : samples) {
    ad::Tape tape;
    auto tp = model::register_params(tape, params);
    auto res = model::forward(tape, tp, cfg, s.exo_occ, s.exo_env, s.hist);
    const double y = tape.value(res.prediction)(0, 0);
    total += (y - s.label) * (y - s.label);
  }
  return total / static_cast<double>(samples.size());
}

}  // namespace

TrainResult train(const TimeSeriesFrame& frame, const ModelConfig& model_cfg,
                  const TrainConfig& train_cfg) {
  model_cfg.validate();
  train_cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();

  SplitFrames split = chronological_split(frame);
  NormStats norm = fit_norm(split.train, 1.0);
  const TimeSeriesFrame train_frame = apply_norm(split.train, norm);
  const TimeSeriesFrame val_frame = apply_norm(split.validation, norm);

  const auto occ_cols = frame.occupancy_columns();
  const auto env_cols = frame.environmental_columns();
  if (static_cast<Index>(occ_cols.size()) != model_cfg.n_occ ||
      static_cast<Index>(env_cols.size()) != model_cfg.n_env)
    throw ConfigError(
        "train: model channel counts (" + std::to_string(model_cfg.n_occ) +
        " occ, " + std::to_string(model_cfg.n_env) +
        " env) do not match the frame (" + std::to_string(occ_cols.size()) +
        " occ, " + std::to_string(env_cols.size()) + " env)");

  // Teacher-forced one-step targets; multi-step forecasts roll at inference.
  const auto train_samples =
      prepare(make_windows(train_frame, model_cfg.window, 1, train_cfg.stride),
              occ_cols, env_cols);
  const auto val_samples = prepare(
      make_windows(val_frame, model_cfg.window, 1, 1), occ_cols, env_cols);

  ModelParams params = ModelParams::init(model_cfg, train_cfg.seed);

  std::vector<std::string> names;
  params.visit([&](const char* n, Matrix&) { names.emplace_back(n); });

  AdamState adam;
  TrainReport report;
  ModelParams best = params;
  double best_val = std::numeric_limits<double>::infinity();
  Index stale = 0;

  std::vector<std::size_t> order(train_samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (Index epoch = 0; epoch < train_cfg.max_epochs; ++epoch) {
    // Seeded Fisher-Yates shuffle within the training split.
    RandomStream shuffle(train_cfg.seed,
                         kShuffleStream + static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle.below(i)]);

    RandomStream dropout(train_cfg.seed,
                         kDropoutStream + static_cast<std::uint64_t>(epoch));
    const bool use_dropout = train_cfg.dropout_rate > 0.0;

    double epoch_loss = 0.0;
    std::size_t cursor = 0;
    while (cursor < order.size()) {
      const std::size_t batch_end = std::min(
          order.size(), cursor + static_cast<std::size_t>(train_cfg.batch_size));
      ad::Tape tape;
      auto tp = model::register_params(tape, params);
      std::vector<ad::Var> losses;
      losses.reserve(batch_end - cursor);
      for (std::size_t b = cursor; b < batch_end; ++b) {
        const PreparedSample& s = train_samples[order[b]];
        ForwardHooks hooks;
        std::vector<Matrix> enc_masks, dec_masks;
        if (use_dropout) {
          enc_masks = dropout_masks(dropout, model_cfg.window,
                                    model_cfg.enc_hidden,
                                    train_cfg.dropout_rate);
          dec_masks = dropout_masks(dropout, model_cfg.window - 1,
                                    model_cfg.dec_hidden,
                                    train_cfg.dropout_rate);
          hooks.enc_dropout = &enc_masks;
          hooks.dec_dropout = &dec_masks;
        }
        auto res = model::forward(tape, tp, model_cfg, s.exo_occ, s.exo_env,
                                  s.hist, hooks);
        Matrix truth(1, 1);
        truth(0, 0) = s.label;
        losses.push_back(tape.mse(res.prediction, tape.leaf(std::move(truth))));
      }
      ad::Var batch_loss = tape.scale(
          tape.add_n(losses), 1.0 / static_cast<double>(losses.size()));
      const double loss_value = tape.value(batch_loss)(0, 0);
      if (!std::isfinite(loss_value))
        throw NumericError("train: loss diverged at epoch " +
                           std::to_string(epoch + 1));
      epoch_loss += loss_value * static_cast<double>(losses.size());
      tape.backward(batch_loss);

      std::vector<Matrix> grads;
      grads.reserve(tp.vars.size());
      for (ad::Var v : tp.vars) grads.push_back(tape.grad(v));
      if (train_cfg.clip_norm > 0.0) {
        double sq = 0.0;
        for (const Matrix& g : grads) sq += g.squaredNorm();
        const double norm_g = std::sqrt(sq);
        if (norm_g > train_cfg.clip_norm) {
          const double scale = train_cfg.clip_norm / norm_g;
          for (Matrix& g : grads) g *= scale;
        }
      }
      std::vector<Matrix*> ptrs;
      params.visit([&](const char*, Matrix& m) { ptrs.push_back(&m); });
      adam_step(ptrs, grads, names, adam, train_cfg);
      cursor = batch_end;
    }
    report.train_loss.push_back(epoch_loss /
                                static_cast<double>(train_samples.size()));

    const double val = eval_loss(val_samples, params, model_cfg);
    if (!std::isfinite(val))
      throw NumericError("train: validation loss diverged at epoch " +
                         std::to_string(epoch + 1));
    report.val_loss.push_back(val);

    if (val < best_val) {
      best_val = val;
      best = params;
      report.best_epoch = epoch;
      stale = 0;
    } else {
      ++stale;
    }
    if (stale >= train_cfg.patience) break;
  }

  report.epochs_run = static_cast<Index>(report.train_loss.size());
  report.best_val_loss = best_val;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();

  TrainResult out;
  out.checkpoint.config = model_cfg;
  out.checkpoint.norm = norm;
  out.checkpoint.params = std::move(best);
  out.report = std::move(report);
  return out;
}

std::string TrainReport::to_json() const {
  nlohmann::json j;
  j["train_loss"] = train_loss;
  j["val_loss"] = val_loss;
  j["best_epoch"] = best_epoch;
  j["best_val_loss"] = best_val_loss;
  j["epochs_run"] = epochs_run;
  j["wall_seconds"] = wall_seconds;
  return j.dump(2);
}

}  // namespace bsx
