#include <doctest.h>

#include <cmath>

#include "bsx/errors.hpp"
#include "bsx/prng.hpp"
#include "bsx/synthetic.hpp"
#include "bsx/training.hpp"

using namespace bsx;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

TimeSeriesFrame small_frame(std::uint64_t seed = 42, Index days = 10) {
  GenConfig cfg;
  cfg.days = days;
  cfg.zones = 2;
  cfg.env_channels = 2;
  cfg.coupling = 0.9;
  cfg.noise_std = 0.05;
  cfg.seed = seed;
  return generate(cfg);
}

ModelConfig small_model() {
  ModelConfig cfg;
  cfg.window = 6;
  cfg.n_occ = 2;
  cfg.n_env = 2;
  cfg.enc_hidden = 8;
  cfg.dec_hidden = 8;
  return cfg;
}

TrainConfig quick_train(Index epochs) {
  TrainConfig tc;
  tc.batch_size = 64;
  tc.max_epochs = epochs;
  tc.patience = epochs;
  tc.dropout_rate = 0.0;
  return tc;
}

}  // namespace

TEST_CASE("mse_loss hand cases") {
  CHECK(mse_loss(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0);
  CHECK(mse_loss(vec({1, 2}), vec({3, 2})) == 2.0);
  CHECK_THROWS_AS(mse_loss(vec({1}), vec({1, 2})), NumericError);
}

TEST_CASE("mse_loss scales quadratically") {
  RandomStream rs(3, 0);
  Vector a(6), b(6);
  for (Index i = 0; i < 6; ++i) {
    a(i) = rs.normal();
    b(i) = rs.normal();
  }
  const double base = mse_loss(a, b);
  const double c = 3.5;
  CHECK(mse_loss(c * a, c * b) == doctest::Approx(c * c * base).epsilon(1e-12));
}

TEST_CASE("adam_step leaves parameters unchanged for zero gradients") {
  Matrix p(2, 2);
  p << 1, 2, 3, 4;
  const Matrix before = p;
  AdamState state;
  TrainConfig cfg;
  adam_step({&p}, {Matrix::Zero(2, 2)}, {"p"}, state, cfg);
  CHECK(p == before);
}

TEST_CASE("first adam step moves by about the learning rate") {
  Matrix p(1, 1);
  p << 5.0;
  AdamState state;
  TrainConfig cfg;  // lr 0.001, beta defaults
  adam_step({&p}, {Matrix::Ones(1, 1)}, {"p"}, state, cfg);
  // m_hat = v_hat = 1, so the update is -lr / (1 + eps).
  CHECK(p(0, 0) == doctest::Approx(5.0 - 0.001).epsilon(1e-6));
  CHECK(state.step == 1);
}

TEST_CASE("adam decreases a convex quadratic") {
  for (double lr : {0.001, 0.01, 0.1}) {
    Matrix x(1, 1);
    x << 3.0;
    AdamState state;
    TrainConfig cfg;
    cfg.learning_rate = lr;
    auto loss = [&]() { return 0.5 * x(0, 0) * x(0, 0); };
    const double before = loss();
    Matrix g(1, 1);
    g << x(0, 0);
    adam_step({&x}, {g}, {"x"}, state, cfg);
    CHECK(loss() < before);
    const double mid = loss();
    g(0, 0) = x(0, 0);
    adam_step({&x}, {g}, {"x"}, state, cfg);
    CHECK(loss() < mid);
  }
}

TEST_CASE("adam aborts on nonfinite gradients naming the parameter") {
  Matrix p = Matrix::Ones(1, 1);
  Matrix g(1, 1);
  g << std::numeric_limits<double>::quiet_NaN();
  AdamState state;
  TrainConfig cfg;
  CHECK_THROWS_WITH_AS(adam_step({&p}, {g}, {"head_w"}, state, cfg),
                       doctest::Contains("head_w"), NumericError);
}

TEST_CASE("training with zero learning rate leaves parameters bitwise") {
  const TimeSeriesFrame frame = small_frame();
  const ModelConfig mc = small_model();
  TrainConfig tc = quick_train(2);
  tc.learning_rate = 0.0;
  const TrainResult result = train(frame, mc, tc);
  const ModelParams init = ModelParams::init(mc, tc.seed);
  bool identical = true;
  result.checkpoint.params.visit([&](const char* name, const Matrix& m) {
    init.visit([&](const char* other, const Matrix& src) {
      if (std::string(name) == other && !(m == src)) identical = false;
    });
  });
  CHECK(identical);
}

TEST_CASE("training is bitwise reproducible for a fixed seed") {
  const TimeSeriesFrame frame = small_frame();
  const ModelConfig mc = small_model();
  TrainConfig tc = quick_train(3);
  tc.dropout_rate = 0.2;
  const TrainResult a = train(frame, mc, tc);
  const TrainResult b = train(frame, mc, tc);
  CHECK(a.checkpoint.to_json() == b.checkpoint.to_json());
  CHECK(a.report.train_loss == b.report.train_loss);
  CHECK(a.report.val_loss == b.report.val_loss);
  CHECK(a.report.best_epoch == b.report.best_epoch);

  TrainConfig tc2 = tc;
  tc2.seed = tc.seed + 1;
  const TrainResult c = train(frame, mc, tc2);
  CHECK(a.checkpoint.to_json() != c.checkpoint.to_json());
}

TEST_CASE("a short run reduces the training loss") {
  const TimeSeriesFrame frame = small_frame(7, 12);
  const ModelConfig mc = small_model();
  TrainConfig tc = quick_train(15);
  tc.learning_rate = 0.005;
  const TrainResult result = train(frame, mc, tc);
  REQUIRE(result.report.train_loss.size() == 15);
  CHECK(result.report.train_loss.back() <
        0.6 * result.report.train_loss.front());
  CHECK(result.report.best_val_loss <= result.report.val_loss.back());
}

TEST_CASE("best checkpoint tracks the lowest validation loss") {
  const TimeSeriesFrame frame = small_frame(9, 10);
  const TrainResult result = train(frame, small_model(), quick_train(6));
  const auto& vl = result.report.val_loss;
  const double best = *std::min_element(vl.begin(), vl.end());
  CHECK(result.report.best_val_loss == best);
  CHECK(vl[static_cast<std::size_t>(result.report.best_epoch)] == best);
}

TEST_CASE("early stopping halts after patience epochs without improvement") {
  const TimeSeriesFrame frame = small_frame(11, 10);
  TrainConfig tc = quick_train(60);
  tc.patience = 2;
  tc.learning_rate = 0.0;  // validation loss can never improve after epoch 1
  const TrainResult result = train(frame, small_model(), tc);
  CHECK(result.report.epochs_run == 3);  // first epoch + 2 stale epochs
}

TEST_CASE("dropout config does not leak into validation-time forwards") {
  const TimeSeriesFrame frame = small_frame(13, 10);
  TrainConfig tc = quick_train(2);
  tc.dropout_rate = 0.3;
  const TrainResult result = train(frame, small_model(), tc);

  const SplitFrames split = chronological_split(frame);
  const TimeSeriesFrame test_norm =
      apply_norm(split.test, result.checkpoint.norm);
  const auto windows = make_windows(test_norm, 6, 1, 1);
  ModelConfig a = result.checkpoint.config;
  ModelConfig b = a;
  a.dropout_rate = 0.0;
  b.dropout_rate = 0.9;
  const Prediction pa =
      predict(result.checkpoint.params, a, windows[0], 1,
              result.checkpoint.norm, frame.occupancy_columns(),
              frame.environmental_columns());
  const Prediction pb =
      predict(result.checkpoint.params, b, windows[0], 1,
              result.checkpoint.norm, frame.occupancy_columns(),
              frame.environmental_columns());
  CHECK(pa.forecast == pb.forecast);
}

TEST_CASE("channel count mismatches are rejected") {
  const TimeSeriesFrame frame = small_frame();
  ModelConfig mc = small_model();
  mc.n_occ = 5;
  CHECK_THROWS_AS(train(frame, mc, quick_train(1)), ConfigError);
}
