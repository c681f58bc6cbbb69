#include "bsx/model.hpp"

#include <cmath>

#include "bsx/errors.hpp"
#include "bsx/prng.hpp"

namespace bsx {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kNoOccupancy: return "no_occupancy";
    case Variant::kNoEnvironment: return "no_environment";
    case Variant::kNoCrossDomainAttention: return "no_crossdomain_attention";
    case Variant::kNoTemporalAttention: return "no_temporal_attention";
    case Variant::kNoAttention: return "no_attention";
  }
  return "full";
}

Variant variant_from_string(const std::string& s) {
  if (s == "full") return Variant::kFull;
  if (s == "no_occupancy") return Variant::kNoOccupancy;
  if (s == "no_environment") return Variant::kNoEnvironment;
  if (s == "no_crossdomain_attention") return Variant::kNoCrossDomainAttention;
  if (s == "no_temporal_attention") return Variant::kNoTemporalAttention;
  if (s == "no_attention") return Variant::kNoAttention;
  throw ConfigError("unknown model variant '" + s + "'");
}

void ModelConfig::validate() const {
  if (window < 2) throw ConfigError("model: window must be >= 2");
  if (horizon < 1) throw ConfigError("model: horizon must be >= 1");
  if (enc_hidden < 1 || dec_hidden < 1)
    throw ConfigError("model: hidden sizes must be >= 1");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    throw ConfigError("model: dropout_rate must be in [0, 1)");
  if (variant == Variant::kNoOccupancy && n_env < 1)
    throw ConfigError("model: no_occupancy variant requires n_env >= 1");
  if (variant == Variant::kNoEnvironment && n_occ < 1)
    throw ConfigError("model: no_environment variant requires n_occ >= 1");
  if (encoder_input_size() < 1)
    throw ConfigError("model: no input channels under this variant");
}

namespace {

Matrix empty() { return Matrix(0, 0); }

void shape_params(ModelParams& p, const ModelConfig& cfg) {
  const Index L = cfg.window;
  const Index in = cfg.encoder_input_size();
  const Index hp = cfg.enc_hidden;
  const Index hq = cfg.dec_hidden;

  auto lstm = [](Matrix& wf, Matrix& wi, Matrix& wo, Matrix& wc, Matrix& bf,
                 Matrix& bi, Matrix& bo, Matrix& bc, Index hidden,
                 Index input) {
    wf = Matrix::Zero(hidden, hidden + input);
    wi = Matrix::Zero(hidden, hidden + input);
    wo = Matrix::Zero(hidden, hidden + input);
    wc = Matrix::Zero(hidden, hidden + input);
    bf = Matrix::Zero(hidden, 1);
    bi = Matrix::Zero(hidden, 1);
    bo = Matrix::Zero(hidden, 1);
    bc = Matrix::Zero(hidden, 1);
  };
  lstm(p.enc_wf, p.enc_wi, p.enc_wo, p.enc_wc, p.enc_bf, p.enc_bi, p.enc_bo,
       p.enc_bc, hp, in);
  lstm(p.dec_wf, p.dec_wi, p.dec_wo, p.dec_wc, p.dec_bf, p.dec_bi, p.dec_bo,
       p.dec_bc, hq, 1);

  auto attention = [&](Matrix& v, Matrix& w, Matrix& u, Matrix& b, Index rows,
                       Index state) {
    v = Matrix::Zero(rows, 1);
    w = Matrix::Zero(rows, 2 * state);
    u = Matrix::Zero(rows, rows);
    b = Matrix::Zero(rows, 1);
  };
  if (cfg.use_crossdomain() && cfg.use_occupancy())
    attention(p.occ_att_v, p.occ_att_w, p.occ_att_u, p.occ_att_b, L, hp);
  else
    p.occ_att_v = p.occ_att_w = p.occ_att_u = p.occ_att_b = empty();
  if (cfg.use_crossdomain() && cfg.use_environment())
    attention(p.env_att_v, p.env_att_w, p.env_att_u, p.env_att_b, L, hp);
  else
    p.env_att_v = p.env_att_w = p.env_att_u = p.env_att_b = empty();
  if (cfg.use_temporal())
    attention(p.time_att_v, p.time_att_w, p.time_att_u, p.time_att_b, hp, hq);
  else
    p.time_att_v = p.time_att_w = p.time_att_u = p.time_att_b = empty();

  p.fuse_w = Matrix::Zero(hp + 1, 1);
  p.fuse_b = Matrix::Zero(1, 1);
  p.head_w = Matrix::Zero(hq, hp + hq);
  p.head_b = Matrix::Zero(hq, 1);
  p.head_v = Matrix::Zero(hq, 1);
  p.head_bias = Matrix::Zero(1, 1);
}

}  // namespace

ModelParams ModelParams::zeros(const ModelConfig& cfg) {
  cfg.validate();
  ModelParams p;
  shape_params(p, cfg);
  return p;
}

ModelParams ModelParams::init(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParams p = zeros(cfg);
  std::uint64_t stream = 1000;
  p.visit([&](const char* name, Matrix& m) {
    const std::string n(name);
    const bool is_bias = n.find("_b") != std::string::npos &&
                         n.find("_bf") == std::string::npos;
    ++stream;
    if (m.size() == 0) return;
    if (n == "enc_bf" || n == "dec_bf") {
      m.setConstant(1.0);  // forget-gate bias
      return;
    }
    if (is_bias) return;  // biases start at zero
    const Index fan_in = m.cols() > 1 ? m.cols() : m.rows();
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uint64_t k = 0;
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j)
        m(i, j) = bound * (2.0 * rng::uniform(seed, stream, k++) - 1.0);
  });
  return p;
}

namespace model {

TapeParams register_params(ad::Tape& tape, const ModelParams& params) {
  std::vector<ad::Var> vars;
  params.visit([&](const char*, const Matrix& m) {
    vars.push_back(tape.param(m));
  });
  return bind_params(vars);
}

TapeParams bind_params(const std::vector<ad::Var>& vars) {
  TapeParams tp;
  tp.vars = vars;
  std::size_t i = 0;
  auto next = [&]() { return vars.at(i++); };
  tp.enc_wf = next(); tp.enc_wi = next(); tp.enc_wo = next();
  tp.enc_wc = next(); tp.enc_bf = next(); tp.enc_bi = next();
  tp.enc_bo = next(); tp.enc_bc = next();
  tp.occ_att_v = next(); tp.occ_att_w = next(); tp.occ_att_u = next();
  tp.occ_att_b = next();
  tp.env_att_v = next(); tp.env_att_w = next(); tp.env_att_u = next();
  tp.env_att_b = next();
  tp.dec_wf = next(); tp.dec_wi = next(); tp.dec_wo = next();
  tp.dec_wc = next(); tp.dec_bf = next(); tp.dec_bi = next();
  tp.dec_bo = next(); tp.dec_bc = next();
  tp.time_att_v = next(); tp.time_att_w = next(); tp.time_att_u = next();
  tp.time_att_b = next();
  tp.fuse_w = next(); tp.fuse_b = next();
  tp.head_w = next(); tp.head_b = next(); tp.head_v = next();
  tp.head_bias = next();
  return tp;
}

std::pair<ad::Var, ad::Var> lstm_cell(ad::Tape& tape, const LstmGates& g,
                                      ad::Var h_prev, ad::Var s_prev,
                                      ad::Var x) {
  ad::Var z = tape.concat_rows(h_prev, x);
  ad::Var forget = tape.sigmoid(tape.add(tape.matmul(g.wf, z), g.bf));
  ad::Var input = tape.sigmoid(tape.add(tape.matmul(g.wi, z), g.bi));
  ad::Var output = tape.sigmoid(tape.add(tape.matmul(g.wo, z), g.bo));
  ad::Var cand = tape.tanh(tape.add(tape.matmul(g.wc, z), g.bc));
  ad::Var s = tape.add(tape.hadamard(forget, s_prev),
                       tape.hadamard(input, cand));
  ad::Var h = tape.hadamard(output, tape.tanh(s));
  return {h, s};
}

namespace {

LstmGates encoder_gates(const TapeParams& p) {
  return {p.enc_wf, p.enc_wi, p.enc_wo, p.enc_wc,
          p.enc_bf, p.enc_bi, p.enc_bo, p.enc_bc};
}

LstmGates decoder_gates(const TapeParams& p) {
  return {p.dec_wf, p.dec_wi, p.dec_wo, p.dec_wc,
          p.dec_bf, p.dec_bi, p.dec_bo, p.dec_bc};
}

// Channel weights for one encoder step: softmax over
// v^T tanh(w [h; s] + u x_channel + b), one logit per channel column.
ad::Var channel_weights(ad::Tape& tape, ad::Var v, ad::Var w, ad::Var b,
                        ad::Var u_series, ad::Var h_prev, ad::Var s_prev,
                        const ForwardHooks& hooks) {
  if (hooks.identity_crossdomain) {
    return tape.leaf(Matrix::Ones(tape.value(u_series).cols(), 1));
  }
  ad::Var z = tape.concat_rows(h_prev, s_prev);
  ad::Var lin = tape.add(tape.matmul(w, z), b);
  ad::Var scores = tape.tanh(tape.add_colwise(u_series, lin));
  ad::Var logits = tape.matmul(tape.transpose(scores), v);
  if (hooks.logit_shift != 0.0) {
    const Index n = tape.value(logits).rows();
    logits = tape.add(
        logits, tape.leaf(Matrix::Constant(n, 1, hooks.logit_shift)));
  }
  return tape.softmax(logits);
}

void check_finite(ad::Tape& tape, ad::Var v, const std::string& where) {
  if (!all_finite(tape.value(v)))
    throw NumericError("nonfinite value in " + where);
}

}  // namespace

EncodeResult encode(ad::Tape& tape, const TapeParams& p,
                    const ModelConfig& cfg, const Matrix& exo_occ,
                    const Matrix& exo_env, const ForwardHooks& hooks) {
  const Index L = cfg.window;
  const bool occ = cfg.use_occupancy();
  const bool env = cfg.use_environment();
  if (occ && (exo_occ.rows() != L || exo_occ.cols() != cfg.n_occ))
    throw NumericError("encode: occupancy block is " + shape_str(exo_occ) +
                       ", expected " + std::to_string(L) + "x" +
                       std::to_string(cfg.n_occ));
  if (env && (exo_env.rows() != L || exo_env.cols() != cfg.n_env))
    throw NumericError("encode: environmental block is " + shape_str(exo_env) +
                       ", expected " + std::to_string(L) + "x" +
                       std::to_string(cfg.n_env));

  EncodeResult result;
  ad::Var x_occ, x_env, x_raw;
  ad::Var occ_base, env_base;  // u * series, shared across steps
  if (cfg.use_crossdomain()) {
    if (occ) {
      x_occ = tape.leaf(exo_occ);
      occ_base = tape.matmul(p.occ_att_u, x_occ);
      result.occupancy_weights.resize(L, cfg.n_occ);
    }
    if (env) {
      x_env = tape.leaf(exo_env);
      env_base = tape.matmul(p.env_att_u, x_env);
      result.environmental_weights.resize(L, cfg.n_env);
    }
  } else {
    // Raw input keeps the [environment; occupancy] column order the
    // attention path produces.
    Matrix all(L, cfg.encoder_input_size());
    Index off = 0;
    if (env) {
      all.middleCols(off, cfg.n_env) = exo_env;
      off += cfg.n_env;
    }
    if (occ) all.middleCols(off, cfg.n_occ) = exo_occ;
    x_raw = tape.leaf(std::move(all));
  }

  const Index hp = cfg.enc_hidden;
  ad::Var h = tape.leaf(Matrix::Zero(hp, 1));
  ad::Var s = tape.leaf(Matrix::Zero(hp, 1));
  std::vector<ad::Var> cols;
  cols.reserve(static_cast<std::size_t>(L));

  for (Index t = 0; t < L; ++t) {
    ad::Var xt;
    if (cfg.use_crossdomain()) {
      std::vector<ad::Var> parts;
      if (env) {
        ad::Var alpha = channel_weights(tape, p.env_att_v, p.env_att_w,
                                        p.env_att_b, env_base, h, s, hooks);
        result.environmental_weights.row(t) =
            tape.value(alpha).col(0).transpose();
        parts.push_back(tape.hadamard(alpha, tape.row_vec(x_env, t)));
      }
      if (occ) {
        ad::Var beta = channel_weights(tape, p.occ_att_v, p.occ_att_w,
                                       p.occ_att_b, occ_base, h, s, hooks);
        result.occupancy_weights.row(t) = tape.value(beta).col(0).transpose();
        parts.push_back(tape.hadamard(beta, tape.row_vec(x_occ, t)));
      }
      xt = parts.size() == 2 ? tape.concat_rows(parts[0], parts[1]) : parts[0];
    } else {
      xt = tape.row_vec(x_raw, t);
    }
    auto [h_next, s_next] = lstm_cell(tape, encoder_gates(p), h, s, xt);
    check_finite(tape, h_next, "encoder step " + std::to_string(t));
    s = s_next;
    h = h_next;
    if (hooks.enc_dropout)
      h = tape.hadamard(
          h, tape.leaf(hooks.enc_dropout->at(static_cast<std::size_t>(t))));
    cols.push_back(h);
  }
  result.hidden = tape.transpose(tape.concat_cols(cols));
  return result;
}

namespace {

struct TemporalContext {
  ad::Var hidden_cols;  // p x L
  ad::Var att_base;     // u * hidden, p x L
};

// One temporal-attention step; appends the weight row to `gamma`.
ad::Var attend(ad::Tape& tape, const TapeParams& p, const TemporalContext& ctx,
               ad::Var hd, ad::Var sd, const ForwardHooks& hooks,
               Matrix& gamma) {
  ad::Var z = tape.concat_rows(hd, sd);
  ad::Var lin = tape.add(tape.matmul(p.time_att_w, z), p.time_att_b);
  ad::Var scores = tape.tanh(tape.add_colwise(ctx.att_base, lin));
  ad::Var logits = tape.matmul(tape.transpose(scores), p.time_att_v);
  if (hooks.logit_shift != 0.0) {
    const Index n = tape.value(logits).rows();
    logits = tape.add(
        logits, tape.leaf(Matrix::Constant(n, 1, hooks.logit_shift)));
  }
  ad::Var weights = tape.softmax(logits);
  gamma.conservativeResize(gamma.rows() + 1, tape.value(weights).rows());
  gamma.row(gamma.rows() - 1) = tape.value(weights).col(0).transpose();
  return tape.matmul(ctx.hidden_cols, weights);
}

}  // namespace

DecodeResult decode(ad::Tape& tape, const TapeParams& p,
                    const ModelConfig& cfg, ad::Var hidden,
                    const Vector& hist, const ForwardHooks& hooks) {
  const Index L = cfg.window;
  if (hist.size() != L - 1)
    throw NumericError("decode: history length " + std::to_string(hist.size()) +
                       ", expected " + std::to_string(L - 1));

  DecodeResult result;
  result.temporal_weights.resize(0, 0);

  TemporalContext ctx;
  ctx.hidden_cols = tape.transpose(hidden);
  if (cfg.use_temporal())
    ctx.att_base = tape.matmul(p.time_att_u, ctx.hidden_cols);
  // Without temporal attention the context is pinned to the last encoder
  // state.
  ad::Var last_state = tape.row_vec(hidden, L - 1);

  const Index hq = cfg.dec_hidden;
  ad::Var hd = tape.leaf(Matrix::Zero(hq, 1));
  ad::Var sd = tape.leaf(Matrix::Zero(hq, 1));

  auto context_at = [&](ad::Var h_state, ad::Var s_state) {
    if (!cfg.use_temporal()) return last_state;
    return attend(tape, p, ctx, h_state, s_state, hooks,
                  result.temporal_weights);
  };

  ad::Var context = context_at(hd, sd);
  for (Index k = 0; k + 1 < L; ++k) {
    Matrix y(1, 1);
    y(0, 0) = hist(k);
    ad::Var fused_in = tape.concat_rows(tape.leaf(std::move(y)), context);
    ad::Var y_tilde = tape.add(
        tape.matmul(tape.transpose(p.fuse_w), fused_in), p.fuse_b);
    auto [h_next, s_next] =
        lstm_cell(tape, decoder_gates(p), hd, sd, y_tilde);
    check_finite(tape, h_next, "decoder step " + std::to_string(k));
    sd = s_next;
    hd = h_next;
    if (hooks.dec_dropout)
      hd = tape.hadamard(
          hd, tape.leaf(hooks.dec_dropout->at(static_cast<std::size_t>(k))));
    context = context_at(hd, sd);
  }

  ad::Var head_in = tape.concat_rows(context, hd);
  ad::Var lin = tape.add(tape.matmul(p.head_w, head_in), p.head_b);
  result.prediction = tape.add(
      tape.matmul(tape.transpose(p.head_v), lin), p.head_bias);
  check_finite(tape, result.prediction, "output head");
  return result;
}

ForwardResult forward(ad::Tape& tape, const TapeParams& p,
                      const ModelConfig& cfg, const Matrix& exo_occ,
                      const Matrix& exo_env, const Vector& hist,
                      const ForwardHooks& hooks) {
  EncodeResult enc = encode(tape, p, cfg, exo_occ, exo_env, hooks);
  DecodeResult dec = decode(tape, p, cfg, enc.hidden, hist, hooks);
  ForwardResult out;
  out.prediction = dec.prediction;
  out.trace.occupancy = std::move(enc.occupancy_weights);
  out.trace.environmental = std::move(enc.environmental_weights);
  out.trace.temporal = std::move(dec.temporal_weights);
  return out;
}

}  // namespace model

std::pair<Vector, Vector> lstm_cell(const Matrix& wf, const Matrix& wi,
                                    const Matrix& wo, const Matrix& wc,
                                    const Vector& bf, const Vector& bi,
                                    const Vector& bo, const Vector& bc,
                                    const Vector& h_prev, const Vector& s_prev,
                                    const Vector& x) {
  ad::Tape tape;
  model::LstmGates g{tape.leaf(wf), tape.leaf(wi), tape.leaf(wo),
                     tape.leaf(wc), tape.leaf(bf), tape.leaf(bi),
                     tape.leaf(bo), tape.leaf(bc)};
  auto [h, s] = model::lstm_cell(tape, g, tape.leaf(h_prev),
                                 tape.leaf(s_prev), tape.leaf(x));
  return {tape.value(h).col(0), tape.value(s).col(0)};
}

namespace {

Vector attention_weights_of(const Matrix& v, const Matrix& w, const Matrix& u,
                            const Matrix& b, const Vector& h_prev,
                            const Vector& s_prev, const Matrix& series,
                            const char* what) {
  if (series.cols() < 1)
    throw NumericError(std::string(what) + ": no channels to attend over");
  ad::Tape tape;
  ad::Var z = tape.concat_rows(tape.leaf(h_prev), tape.leaf(s_prev));
  ad::Var lin = tape.add(tape.matmul(tape.leaf(w), z), tape.leaf(b));
  ad::Var base = tape.matmul(tape.leaf(u), tape.leaf(series));
  ad::Var scores = tape.tanh(tape.add_colwise(base, lin));
  ad::Var weights =
      tape.softmax(tape.matmul(tape.transpose(scores), tape.leaf(v)));
  return tape.value(weights).col(0);
}

}  // namespace

Vector occupancy_attention(const ModelParams& params, const Vector& h_prev,
                           const Vector& s_prev, const Matrix& x_occ) {
  return attention_weights_of(params.occ_att_v, params.occ_att_w,
                              params.occ_att_u, params.occ_att_b, h_prev,
                              s_prev, x_occ, "occupancy_attention");
}

Vector environmental_attention(const ModelParams& params, const Vector& h_prev,
                               const Vector& s_prev, const Matrix& x_env) {
  return attention_weights_of(params.env_att_v, params.env_att_w,
                              params.env_att_u, params.env_att_b, h_prev,
                              s_prev, x_env, "environmental_attention");
}

std::pair<Vector, Vector> temporal_attention(const ModelParams& params,
                                             const Vector& hd_prev,
                                             const Vector& sd_prev,
                                             const Matrix& hidden) {
  ad::Tape tape;
  ad::Var cols = tape.transpose(tape.leaf(hidden));
  ad::Var z = tape.concat_rows(tape.leaf(hd_prev), tape.leaf(sd_prev));
  ad::Var lin = tape.add(tape.matmul(tape.leaf(params.time_att_w), z),
                         tape.leaf(params.time_att_b));
  ad::Var base = tape.matmul(tape.leaf(params.time_att_u), cols);
  ad::Var scores = tape.tanh(tape.add_colwise(base, lin));
  ad::Var weights = tape.softmax(
      tape.matmul(tape.transpose(scores), tape.leaf(params.time_att_v)));
  ad::Var context = tape.matmul(cols, weights);
  return {tape.value(weights).col(0), tape.value(context).col(0)};
}

std::pair<Matrix, Matrix> split_exo(const Matrix& exo,
                                    const std::vector<Index>& occ_cols,
                                    const std::vector<Index>& env_cols) {
  Matrix occ(exo.rows(), static_cast<Index>(occ_cols.size()));
  Matrix env(exo.rows(), static_cast<Index>(env_cols.size()));
  for (std::size_t i = 0; i < occ_cols.size(); ++i)
    occ.col(static_cast<Index>(i)) = exo.col(occ_cols[i]);
  for (std::size_t i = 0; i < env_cols.size(); ++i)
    env.col(static_cast<Index>(i)) = exo.col(env_cols[i]);
  return {occ, env};
}

Prediction predict(const ModelParams& params, const ModelConfig& cfg,
                   const SampleWindow& window, Index tau, const NormStats& norm,
                   const std::vector<Index>& occ_cols,
                   const std::vector<Index>& env_cols,
                   const ForwardHooks& hooks) {
  if (tau < 1) throw ConfigError("predict: tau must be >= 1");
  Matrix exo = window.exo;
  Vector hist = window.hist;
  Prediction out;
  out.forecast.resize(tau);
  for (Index step = 0; step < tau; ++step) {
    auto [x_occ, x_env] = split_exo(exo, occ_cols, env_cols);
    ad::Tape tape;
    model::TapeParams tp = model::register_params(tape, params);
    auto res = model::forward(tape, tp, cfg, x_occ, x_env, hist, hooks);
    const double y = tape.value(res.prediction)(0, 0);
    out.forecast(step) = y;
    out.traces.push_back(std::move(res.trace));
    if (step + 1 < tau) {
      // Slide forward: future exogenous rows are unobserved, repeat the last.
      Matrix next_exo(exo.rows(), exo.cols());
      next_exo.topRows(exo.rows() - 1) = exo.bottomRows(exo.rows() - 1);
      next_exo.row(next_exo.rows() - 1) = exo.row(exo.rows() - 1);
      exo = std::move(next_exo);
      Vector next_hist(hist.size());
      next_hist.head(hist.size() - 1) = hist.tail(hist.size() - 1);
      next_hist(hist.size() - 1) = y;
      hist = std::move(next_hist);
    }
  }
  out.forecast = invert_norm_traffic(out.forecast, norm).cwiseMax(0.0);
  return out;
}

}  // namespace bsx
