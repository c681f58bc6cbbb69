#include "bsx/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bsx/errors.hpp"
#include "bsx/prng.hpp"

namespace bsx {

namespace {

int day_of_week(std::int64_t local_ts) {
  return static_cast<int>((local_ts / 86400 + 3) % 7);  // 0 = Monday
}

}  // namespace

HistoricalAverage HistoricalAverage::fit(const TimeSeriesFrame& frame,
                                         int utc_offset_hours) {
  HistoricalAverage ha;
  ha.utc_offset_hours_ = utc_offset_hours;
  const std::int64_t off =
      static_cast<std::int64_t>(utc_offset_hours) * 3600;
  for (Index i = 0; i < frame.rows(); ++i) {
    const std::int64_t local =
        frame.timestamps[static_cast<std::size_t>(i)] + off;
    const int dow = day_of_week(local);
    const int hour = static_cast<int>((local % 86400) / 3600);
    ha.sum_[dow][hour] += frame.traffic(i);
    ha.count_[dow][hour] += 1;
  }
  return ha;
}

double HistoricalAverage::predict(std::int64_t timestamp) const {
  const std::int64_t local =
      timestamp + static_cast<std::int64_t>(utc_offset_hours_) * 3600;
  const int dow = day_of_week(local);
  const int hour = static_cast<int>((local % 86400) / 3600);
  if (count_[dow][hour] == 0)
    throw DataError("historical average: no history for day " +
                    std::to_string(dow) + " hour " + std::to_string(hour));
  return sum_[dow][hour] / static_cast<double>(count_[dow][hour]);
}

namespace {

Vector difference(const Vector& s) {
  Vector out(s.size() - 1);
  for (Index i = 0; i + 1 < s.size(); ++i) out(i) = s(i + 1) - s(i);
  return out;
}

}  // namespace

ArimaModel ArimaModel::fit(const Vector& series, Index p, Index d) {
  if (p < 0 || d < 0) throw ConfigError("arima: p and d must be >= 0");
  if (series.size() <= p + d + 1)
    throw DataError("arima: series of length " +
                    std::to_string(series.size()) +
                    " too short for p=" + std::to_string(p) +
                    ", d=" + std::to_string(d));
  Vector z = series;
  for (Index k = 0; k < d; ++k) z = difference(z);

  ArimaModel model;
  model.p = p;
  model.d = d;
  if (p == 0) {
    model.coeffs = Vector::Constant(1, z.mean());
    return model;
  }
  const Index rows = z.size() - p;
  Matrix X(rows, p + 1);
  Vector y(rows);
  for (Index t = 0; t < rows; ++t) {
    for (Index j = 0; j < p; ++j) X(t, j) = z(t + p - 1 - j);
    X(t, p) = 1.0;
    y(t) = z(t + p);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(X);
  if (qr.rank() < X.cols())
    throw NumericError("arima: singular normal equations");
  model.coeffs = qr.solve(y);
  return model;
}

Vector ArimaModel::forecast(const Vector& recent, Index steps) const {
  if (recent.size() < p + d)
    throw DataError("arima: need at least " + std::to_string(p + d) +
                    " recent values, got " + std::to_string(recent.size()));
  // Difference the history d times, keeping the integration heads.
  std::vector<Vector> levels;
  levels.push_back(recent);
  for (Index k = 0; k < d; ++k) levels.push_back(difference(levels.back()));

  std::vector<double> z(levels.back().data(),
                        levels.back().data() + levels.back().size());
  std::vector<double> heads(static_cast<std::size_t>(d));
  for (Index k = 0; k < d; ++k)
    heads[static_cast<std::size_t>(k)] =
        levels[static_cast<std::size_t>(k)](levels[static_cast<std::size_t>(k)].size() - 1);

  Vector out(steps);
  for (Index s = 0; s < steps; ++s) {
    double zp;
    if (p == 0) {
      zp = coeffs(0);
    } else {
      zp = coeffs(p);
      for (Index j = 0; j < p; ++j)
        zp += coeffs(j) * z[z.size() - 1 - static_cast<std::size_t>(j)];
    }
    z.push_back(zp);
    // Integrate back to levels.
    double level = zp;
    for (Index k = d; k > 0; --k) {
      level += heads[static_cast<std::size_t>(k - 1)];
      heads[static_cast<std::size_t>(k - 1)] = level;
    }
    out(s) = level;
  }
  return out;
}

VarModel VarModel::fit(const Matrix& series, Index lag) {
  if (lag < 1) throw ConfigError("var: lag must be >= 1");
  const Index dim = series.cols();
  const Index rows = series.rows() - lag;
  if (rows <= lag * dim + 1)
    throw DataError("var: series too short for lag " + std::to_string(lag) +
                    " with " + std::to_string(dim) + " dimensions");
  Matrix X(rows, dim * lag + 1);
  Matrix Y(rows, dim);
  for (Index t = 0; t < rows; ++t) {
    for (Index l = 0; l < lag; ++l)
      X.row(t).segment(l * dim, dim) = series.row(t + lag - 1 - l);
    X(t, dim * lag) = 1.0;
    Y.row(t) = series.row(t + lag);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(X);
  if (qr.rank() < X.cols())
    throw NumericError("var: singular design matrix");
  VarModel model;
  model.lag = lag;
  model.coeffs = qr.solve(Y).transpose();
  return model;
}

Vector VarModel::forecast_step(const Matrix& recent) const {
  const Index dim = coeffs.rows();
  if (recent.rows() < lag || recent.cols() != dim)
    throw DataError("var: need the last " + std::to_string(lag) +
                    " rows of all " + std::to_string(dim) + " series");
  Vector x(dim * lag + 1);
  for (Index l = 0; l < lag; ++l)
    x.segment(l * dim, dim) = recent.row(recent.rows() - 1 - l).transpose();
  x(dim * lag) = 1.0;
  return coeffs * x;
}

double LwrModel::predict(const Vector& query) const {
  const Index n = features.rows();
  const Index dim = features.cols();
  if (query.size() != dim)
    throw DataError("lwr: query has " + std::to_string(query.size()) +
                    " features, expected " + std::to_string(dim));
  Vector w(n);
  double wmax = 0.0;
  const double denom = 2.0 * bandwidth * bandwidth;
  for (Index i = 0; i < n; ++i) {
    const double d2 = (features.row(i).transpose() - query).squaredNorm();
    w(i) = std::exp(-d2 / denom);
    wmax = std::max(wmax, w(i));
  }
  if (wmax < 1e-12)
    throw DataError("lwr: query too far from the training data");

  // Weighted least squares with an intercept.
  Matrix X(n, dim + 1);
  X.leftCols(dim) = features;
  X.col(dim).setOnes();
  const Matrix Xw = w.asDiagonal() * X;
  const Matrix gram = X.transpose() * Xw;
  Eigen::FullPivLU<Matrix> lu(gram);
  if (!lu.isInvertible())
    throw NumericError("lwr: rank-deficient weighted design");
  const Vector beta = lu.solve(X.transpose() * (w.asDiagonal() * targets));
  Vector q(dim + 1);
  q.head(dim) = query;
  q(dim) = 1.0;
  return beta.dot(q);
}

double LwrModel::select_bandwidth(const LwrModel& base,
                                  const Matrix& val_features,
                                  const Vector& val_targets,
                                  const std::vector<double>& candidates) {
  if (candidates.empty())
    throw ConfigError("lwr: empty bandwidth candidate list");
  double best = candidates.back();
  double best_err = std::numeric_limits<double>::infinity();
  for (double b : candidates) {
    LwrModel m = base;
    m.bandwidth = b;
    double err = 0.0;
    bool ok = true;
    for (Index i = 0; i < val_features.rows(); ++i) {
      try {
        err += std::abs(m.predict(val_features.row(i).transpose()) -
                        val_targets(i));
      } catch (const std::runtime_error&) {
        ok = false;
        break;
      }
    }
    if (ok && err < best_err) {
      best_err = err;
      best = b;
    }
  }
  return best;
}

BaselineSpec BaselineSpec::defaults() {
  BaselineSpec s;
  s.lwr_bandwidths = {0.25, 0.5, 1.0, 2.0, 4.0};
  return s;
}

const std::vector<std::string>& known_models() {
  static const std::vector<std::string> names = {
      "ha",     "arima",   "var",          "lwr",
      "lstm",   "seq2seq", "seq2seq-attn", "buildsensys"};
  return names;
}

namespace {

// ---------------------------------------------------------------------------
// LSTM baseline: one recurrent pass over [traffic; channels] rows, linear
// head on the final hidden state.
// ---------------------------------------------------------------------------

struct LstmBaselineParams {
  Matrix wf, wi, wo, wc, bf, bi, bo, bc, head_w, head_b;

  template <class F>
  void visit(F&& f) {
    f("wf", wf); f("wi", wi); f("wo", wo); f("wc", wc);
    f("bf", bf); f("bi", bi); f("bo", bo); f("bc", bc);
    f("head_w", head_w); f("head_b", head_b);
  }

  static LstmBaselineParams init(Index hidden, Index input,
                                 std::uint64_t seed) {
    LstmBaselineParams p;
    p.wf = p.wi = p.wo = p.wc = Matrix::Zero(hidden, hidden + input);
    p.bf = p.bi = p.bo = p.bc = Matrix::Zero(hidden, 1);
    p.head_w = Matrix::Zero(1, hidden);
    p.head_b = Matrix::Zero(1, 1);
    std::uint64_t stream = 5000;
    p.visit([&](const char* name, Matrix& m) {
      ++stream;
      const std::string n(name);
      if (n == "bf") {
        m.setConstant(1.0);
        return;
      }
      if (n[0] == 'b' || n == "head_b") return;
      const Index fan_in = m.cols() > 1 ? m.cols() : m.rows();
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      std::uint64_t k = 0;
      for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
          m(i, j) = bound * (2.0 * rng::uniform(seed, stream, k++) - 1.0);
    });
    return p;
  }
};

// Window rows [y; x] with the unobserved anchor-hour traffic repeated from
// the previous hour.
Matrix lstm_inputs(const Matrix& exo_norm, const Vector& hist_norm) {
  const Index L = exo_norm.rows();
  Matrix in(L, exo_norm.cols() + 1);
  for (Index t = 0; t < L; ++t)
    in(t, 0) = t < L - 1 ? hist_norm(t) : hist_norm(L - 2);
  in.rightCols(exo_norm.cols()) = exo_norm;
  return in;
}

ad::Var lstm_baseline_forward(ad::Tape& tape,
                              const std::vector<ad::Var>& vars,
                              Index hidden, const Matrix& inputs) {
  model::LstmGates g{vars[0], vars[1], vars[2], vars[3],
                     vars[4], vars[5], vars[6], vars[7]};
  ad::Var head_w = vars[8];
  ad::Var head_b = vars[9];
  ad::Var x = tape.leaf(inputs);
  ad::Var h = tape.leaf(Matrix::Zero(hidden, 1));
  ad::Var s = tape.leaf(Matrix::Zero(hidden, 1));
  for (Index t = 0; t < inputs.rows(); ++t) {
    auto [hn, sn] = model::lstm_cell(tape, g, h, s, tape.row_vec(x, t));
    h = hn;
    s = sn;
  }
  return tape.add(tape.matmul(head_w, h), head_b);
}

struct PreparedLstmSample {
  Matrix inputs;
  double label;
};

LstmBaselineParams train_lstm_baseline(
    const std::vector<PreparedLstmSample>& samples, Index hidden, Index input,
    const TrainConfig& cfg) {
  LstmBaselineParams params = LstmBaselineParams::init(hidden, input, cfg.seed);
  std::vector<std::string> names;
  params.visit([&](const char* n, Matrix&) { names.emplace_back(n); });
  AdamState adam;

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  // Fixed epoch budget; the baseline has no validation-selection step.
  const Index epochs = std::min<Index>(cfg.max_epochs, 60);
  for (Index epoch = 0; epoch < epochs; ++epoch) {
    RandomStream shuffle(cfg.seed, 6000 + static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle.below(i)]);
    std::size_t cursor = 0;
    while (cursor < order.size()) {
      const std::size_t end = std::min(
          order.size(), cursor + static_cast<std::size_t>(cfg.batch_size));
      ad::Tape tape;
      std::vector<ad::Var> vars;
      params.visit([&](const char*, Matrix& m) { vars.push_back(tape.param(m)); });
      std::vector<ad::Var> losses;
      for (std::size_t b = cursor; b < end; ++b) {
        const auto& s = samples[order[b]];
        ad::Var pred = lstm_baseline_forward(tape, vars, hidden, s.inputs);
        Matrix truth(1, 1);
        truth(0, 0) = s.label;
        losses.push_back(tape.mse(pred, tape.leaf(std::move(truth))));
      }
      ad::Var loss = tape.scale(tape.add_n(losses),
                                1.0 / static_cast<double>(losses.size()));
      if (!std::isfinite(tape.value(loss)(0, 0)))
        throw NumericError("lstm baseline: loss diverged at epoch " +
                           std::to_string(epoch + 1));
      tape.backward(loss);
      std::vector<Matrix> grads;
      for (ad::Var v : vars) grads.push_back(tape.grad(v));
      if (cfg.clip_norm > 0.0) {
        double sq = 0.0;
        for (const Matrix& g : grads) sq += g.squaredNorm();
        if (sq > cfg.clip_norm * cfg.clip_norm) {
          const double scale = cfg.clip_norm / std::sqrt(sq);
          for (Matrix& g : grads) g *= scale;
        }
      }
      std::vector<Matrix*> ptrs;
      params.visit([&](const char*, Matrix& m) { ptrs.push_back(&m); });
      adam_step(ptrs, grads, names, adam, cfg);
      cursor = end;
    }
  }
  return params;
}

// ---------------------------------------------------------------------------
// Evaluation orchestration
// ---------------------------------------------------------------------------

struct EvalData {
  SplitFrames split;
  NormStats norm;
  TimeSeriesFrame train_norm, val_norm, test_norm;
  std::vector<SampleWindow> test_raw, test_norm_windows;
  std::vector<Index> occ_cols, env_cols;
  Index anchor_row0 = 0;  // global row index of the first test-window anchor
};

EvalData make_eval_data(const TimeSeriesFrame& frame, Index L, Index horizon) {
  EvalData d;
  d.split = chronological_split(frame);
  d.norm = fit_norm(d.split.train, 1.0);
  d.train_norm = apply_norm(d.split.train, d.norm);
  d.val_norm = apply_norm(d.split.validation, d.norm);
  d.test_norm = apply_norm(d.split.test, d.norm);
  d.test_raw = make_windows(d.split.test, L, horizon, 1);
  d.test_norm_windows = make_windows(d.test_norm, L, horizon, 1);
  d.occ_cols = frame.occupancy_columns();
  d.env_cols = frame.environmental_columns();
  d.anchor_row0 = d.split.train.rows() + d.split.validation.rows() + (L - 1);
  return d;
}

EvalEntry finish_entry(const std::string& name, const EvalContext& ctx,
                       const std::vector<double>& preds,
                       const std::vector<double>& truths) {
  Vector p(static_cast<Index>(preds.size()));
  Vector t(static_cast<Index>(truths.size()));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    p(static_cast<Index>(i)) = preds[i];
    t(static_cast<Index>(i)) = truths[i];
  }
  EvalEntry e;
  e.model = name;
  e.road = ctx.road;
  e.horizon = ctx.horizon;
  e.mae = mae(p, t);
  e.rmse = rmse(p, t);
  const MapeResult mr = mape(p, t);
  e.mape_percent = mr.percent;
  e.mape_excluded = mr.excluded;
  e.samples = static_cast<Index>(preds.size());
  return e;
}

}  // namespace

EvalEntry evaluate_named_model(const std::string& name,
                               const TimeSeriesFrame& frame,
                               const EvalContext& ctx) {
  const Index L = ctx.model_cfg.window;
  const Index h = ctx.horizon;
  EvalData data = make_eval_data(frame, L, h);

  std::vector<double> preds, truths;
  auto pool = [&](const Vector& forecast, const Vector& label) {
    for (Index k = 0; k < forecast.size(); ++k) {
      preds.push_back(forecast(k));
      truths.push_back(label(k));
    }
  };

  if (name == "buildsensys" || name == "seq2seq" || name == "seq2seq-attn") {
    ModelConfig cfg = ctx.model_cfg;
    if (name == "seq2seq") cfg.variant = Variant::kNoAttention;
    if (name == "seq2seq-attn") cfg.variant = Variant::kNoCrossDomainAttention;
    TrainResult tr = train(frame, cfg, ctx.train_cfg);
    for (std::size_t i = 0; i < data.test_norm_windows.size(); ++i) {
      Prediction pr = predict(tr.checkpoint.params, cfg,
                              data.test_norm_windows[i], h, data.norm,
                              data.occ_cols, data.env_cols);
      pool(pr.forecast, data.test_raw[i].label);
    }
  } else if (name == "lstm") {
    std::vector<PreparedLstmSample> train_samples;
    for (const auto& w : make_windows(data.train_norm, L, 1, ctx.train_cfg.stride))
      train_samples.push_back({lstm_inputs(w.exo, w.hist), w.label(0)});
    const Index hidden = ctx.model_cfg.enc_hidden;
    const Index input = frame.num_channels() + 1;
    LstmBaselineParams params =
        train_lstm_baseline(train_samples, hidden, input, ctx.train_cfg);
    for (std::size_t i = 0; i < data.test_norm_windows.size(); ++i) {
      // Roll the window forward feeding predictions back as history.
      Matrix exo = data.test_norm_windows[i].exo;
      Vector hist = data.test_norm_windows[i].hist;
      Vector forecast(h);
      for (Index step = 0; step < h; ++step) {
        ad::Tape tape;
        std::vector<ad::Var> vars;
        params.visit([&](const char*, Matrix& m) { vars.push_back(tape.leaf(m)); });
        ad::Var out =
            lstm_baseline_forward(tape, vars, hidden, lstm_inputs(exo, hist));
        forecast(step) = tape.value(out)(0, 0);
        if (step + 1 < h) {
          Matrix next(exo.rows(), exo.cols());
          next.topRows(exo.rows() - 1) = exo.bottomRows(exo.rows() - 1);
          next.row(next.rows() - 1) = exo.row(exo.rows() - 1);
          exo = std::move(next);
          Vector nh(hist.size());
          nh.head(hist.size() - 1) = hist.tail(hist.size() - 1);
          nh(hist.size() - 1) = forecast(step);
          hist = std::move(nh);
        }
      }
      pool(invert_norm_traffic(forecast, data.norm).cwiseMax(0.0),
           data.test_raw[i].label);
    }
  } else if (name == "ha") {
    HistoricalAverage ha =
        HistoricalAverage::fit(data.split.train, ctx.utc_offset_hours);
    for (const auto& w : data.test_raw) {
      Vector forecast(h);
      for (Index k = 0; k < h; ++k)
        forecast(k) = ha.predict(w.anchor + k * 3600);
      pool(forecast, w.label);
    }
  } else if (name == "arima") {
    ArimaModel model = ArimaModel::fit(data.split.train.traffic,
                                       ctx.baselines.arima_p,
                                       ctx.baselines.arima_d);
    for (const auto& w : data.test_raw)
      pool(model.forecast(w.hist, h).cwiseMax(0.0), w.label);
  } else if (name == "var") {
    // Classical VAR needs more lagged rows than a window carries, so it reads
    // the normalized frame history directly at each window anchor.
    const TimeSeriesFrame full_norm = apply_norm(frame, data.norm);
    Matrix series(full_norm.rows(), full_norm.num_channels() + 1);
    series.leftCols(full_norm.num_channels()) = full_norm.channels;
    series.col(full_norm.num_channels()) = full_norm.traffic;
    const Index fit_rows = data.split.train.rows();
    VarModel model =
        VarModel::fit(series.topRows(fit_rows), ctx.baselines.var_lag);
    const Index dim = series.cols();
    for (std::size_t i = 0; i < data.test_raw.size(); ++i) {
      const Index anchor = data.anchor_row0 + static_cast<Index>(i);
      Matrix recent = series.middleRows(anchor - model.lag, model.lag);
      Vector forecast(h);
      for (Index k = 0; k < h; ++k) {
        const Vector next = model.forecast_step(recent);
        forecast(k) = next(dim - 1);
        Matrix shifted(recent.rows(), recent.cols());
        shifted.topRows(recent.rows() - 1) = recent.bottomRows(recent.rows() - 1);
        shifted.row(recent.rows() - 1) = next.transpose();
        recent = std::move(shifted);
      }
      Vector raw = invert_norm_traffic(forecast, data.norm).cwiseMax(0.0);
      pool(raw, data.test_raw[i].label);
    }
  } else if (name == "lwr") {
    LwrModel base;
    base.features = data.train_norm.channels;
    base.targets = data.split.train.traffic;
    const double scale =
        std::sqrt(static_cast<double>(base.features.cols()));
    std::vector<double> candidates;
    for (double b : ctx.baselines.lwr_bandwidths)
      candidates.push_back(b * scale);
    base.bandwidth = LwrModel::select_bandwidth(
        base, data.val_norm.channels, data.split.validation.traffic,
        candidates);
    for (std::size_t i = 0; i < data.test_norm_windows.size(); ++i) {
      const auto& wn = data.test_norm_windows[i];
      // Features at hours past the anchor are unobserved; reuse the anchor
      // row, as the main model does.
      const Vector query = wn.exo.row(wn.exo.rows() - 1).transpose();
      const double value = std::max(0.0, base.predict(query));
      Vector forecast = Vector::Constant(h, value);
      pool(forecast, data.test_raw[i].label);
    }
  } else {
    throw ConfigError("unknown model '" + name + "'");
  }

  return finish_entry(name, ctx, preds, truths);
}

}  // namespace bsx
