#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bsx/autodiff.hpp"
#include "bsx/dataset.hpp"

namespace bsx {

// Ablation variants. kNoAttention (both attention blocks off) is the plain
// Seq2Seq reduction used by the baselines.
enum class Variant {
  kFull,
  kNoOccupancy,
  kNoEnvironment,
  kNoCrossDomainAttention,
  kNoTemporalAttention,
  kNoAttention,
};

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct ModelConfig {
  Index window = 24;       // L, encoder input length in hours
  Index horizon = 1;       // tau, forecast steps
  Index n_occ = 1;         // occupancy channels
  Index n_env = 0;         // environmental channels
  Index enc_hidden = 64;   // p
  Index dec_hidden = 64;   // q
  Variant variant = Variant::kFull;
  double dropout_rate = 0.2;

  bool use_occupancy() const {
    return variant != Variant::kNoOccupancy && n_occ > 0;
  }
  bool use_environment() const {
    return variant != Variant::kNoEnvironment && n_env > 0;
  }
  bool use_crossdomain() const {
    return variant != Variant::kNoCrossDomainAttention &&
           variant != Variant::kNoAttention;
  }
  bool use_temporal() const {
    return variant != Variant::kNoTemporalAttention &&
           variant != Variant::kNoAttention;
  }
  Index encoder_input_size() const {
    return (use_environment() ? n_env : 0) + (use_occupancy() ? n_occ : 0);
  }
  void validate() const;
};

// Every learnable matrix; vectors are n x 1 and scalars 1 x 1 so the whole
// set enumerates uniformly. Blocks a variant does not use stay 0 x 0.
struct ModelParams {
  // Encoder LSTM, p x (p + input) weights over [h; x].
  Matrix enc_wf, enc_wi, enc_wo, enc_wc;
  Matrix enc_bf, enc_bi, enc_bo, enc_bc;
  // Cross-domain attention over occupancy zones: v,b in R^L, w in R^{Lx2p},
  // u in R^{LxL}; the score of zone j reads that zone's whole window series.
  Matrix occ_att_v, occ_att_w, occ_att_u, occ_att_b;
  Matrix env_att_v, env_att_w, env_att_u, env_att_b;
  // Decoder LSTM, q x (q + 1).
  Matrix dec_wf, dec_wi, dec_wo, dec_wc;
  Matrix dec_bf, dec_bi, dec_bo, dec_bc;
  // Temporal attention: v,b in R^p, w in R^{px2q}, u in R^{pxp}.
  Matrix time_att_v, time_att_w, time_att_u, time_att_b;
  // History fusion [y; c] -> scalar decoder input.
  Matrix fuse_w, fuse_b;
  // Output head over [c_T; h'_T].
  Matrix head_w, head_b, head_v, head_bias;

  template <class F>
  void visit(F&& f) {
    f("enc_wf", enc_wf); f("enc_wi", enc_wi); f("enc_wo", enc_wo);
    f("enc_wc", enc_wc); f("enc_bf", enc_bf); f("enc_bi", enc_bi);
    f("enc_bo", enc_bo); f("enc_bc", enc_bc);
    f("occ_att_v", occ_att_v); f("occ_att_w", occ_att_w);
    f("occ_att_u", occ_att_u); f("occ_att_b", occ_att_b);
    f("env_att_v", env_att_v); f("env_att_w", env_att_w);
    f("env_att_u", env_att_u); f("env_att_b", env_att_b);
    f("dec_wf", dec_wf); f("dec_wi", dec_wi); f("dec_wo", dec_wo);
    f("dec_wc", dec_wc); f("dec_bf", dec_bf); f("dec_bi", dec_bi);
    f("dec_bo", dec_bo); f("dec_bc", dec_bc);
    f("time_att_v", time_att_v); f("time_att_w", time_att_w);
    f("time_att_u", time_att_u); f("time_att_b", time_att_b);
    f("fuse_w", fuse_w); f("fuse_b", fuse_b);
    f("head_w", head_w); f("head_b", head_b); f("head_v", head_v);
    f("head_bias", head_bias);
  }
  template <class F>
  void visit(F&& f) const {
    const_cast<ModelParams*>(this)->visit(
        [&](const char* name, Matrix& m) { f(name, const_cast<const Matrix&>(m)); });
  }

  // Zero-valued parameters with the shapes the config requires.
  static ModelParams zeros(const ModelConfig& cfg);
  // Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) init, forget-gate biases +1.
  static ModelParams init(const ModelConfig& cfg, std::uint64_t seed);
};

// Attention weights recorded during one forward pass. Rows of each matrix
// are softmax distributions (sum to 1).
struct AttentionTrace {
  Matrix occupancy;      // L x N_o
  Matrix environmental;  // L x N_e
  Matrix temporal;       // decode steps x L
};

// Test and inspection knobs threaded through the forward pass.
struct ForwardHooks {
  double logit_shift = 0.0;           // added to every attention logit
  bool identity_crossdomain = false;  // channel weights forced to 1
  const std::vector<Matrix>* enc_dropout = nullptr;  // L masks, p x 1
  const std::vector<Matrix>* dec_dropout = nullptr;  // L-1 masks, q x 1
};

namespace model {

// Parameter handles registered on a tape, in ModelParams::visit order.
struct TapeParams {
  std::vector<ad::Var> vars;
  ad::Var enc_wf, enc_wi, enc_wo, enc_wc, enc_bf, enc_bi, enc_bo, enc_bc;
  ad::Var occ_att_v, occ_att_w, occ_att_u, occ_att_b;
  ad::Var env_att_v, env_att_w, env_att_u, env_att_b;
  ad::Var dec_wf, dec_wi, dec_wo, dec_wc, dec_bf, dec_bi, dec_bo, dec_bc;
  ad::Var time_att_v, time_att_w, time_att_u, time_att_b;
  ad::Var fuse_w, fuse_b;
  ad::Var head_w, head_b, head_v, head_bias;
};

TapeParams register_params(ad::Tape& tape, const ModelParams& params);
// Rebind existing tape variables (e.g. from grad_check) to named handles.
TapeParams bind_params(const std::vector<ad::Var>& vars);

struct LstmGates {
  ad::Var wf, wi, wo, wc, bf, bi, bo, bc;
};

// One LSTM step over [h_prev; x]; returns (h, s).
std::pair<ad::Var, ad::Var> lstm_cell(ad::Tape& tape, const LstmGates& g,
                                      ad::Var h_prev, ad::Var s_prev,
                                      ad::Var x);

struct EncodeResult {
  ad::Var hidden;  // L x p
  Matrix occupancy_weights;
  Matrix environmental_weights;
};

// Cross-domain attention encoder; exo_occ is L x N_o, exo_env is L x N_e
// (either may be empty under the matching variant).
EncodeResult encode(ad::Tape& tape, const TapeParams& p,
                    const ModelConfig& cfg, const Matrix& exo_occ,
                    const Matrix& exo_env, const ForwardHooks& hooks = {});

struct DecodeResult {
  ad::Var prediction;  // 1 x 1, normalized units
  Matrix temporal_weights;
};

DecodeResult decode(ad::Tape& tape, const TapeParams& p,
                    const ModelConfig& cfg, ad::Var hidden,
                    const Vector& hist, const ForwardHooks& hooks = {});

struct ForwardResult {
  ad::Var prediction;
  AttentionTrace trace;
};

// encode + decode over one window already split by channel kind.
ForwardResult forward(ad::Tape& tape, const TapeParams& p,
                      const ModelConfig& cfg, const Matrix& exo_occ,
                      const Matrix& exo_env, const Vector& hist,
                      const ForwardHooks& hooks = {});

}  // namespace model

// Plain-value entry points (each runs a private tape).
std::pair<Vector, Vector> lstm_cell(const Matrix& wf, const Matrix& wi,
                                    const Matrix& wo, const Matrix& wc,
                                    const Vector& bf, const Vector& bi,
                                    const Vector& bo, const Vector& bc,
                                    const Vector& h_prev, const Vector& s_prev,
                                    const Vector& x);

Vector occupancy_attention(const ModelParams& params, const Vector& h_prev,
                           const Vector& s_prev, const Matrix& x_occ);
Vector environmental_attention(const ModelParams& params, const Vector& h_prev,
                               const Vector& s_prev, const Matrix& x_env);
// Returns (weights over encoder steps, context vector).
std::pair<Vector, Vector> temporal_attention(const ModelParams& params,
                                             const Vector& hd_prev,
                                             const Vector& sd_prev,
                                             const Matrix& hidden);

// Split a window's exogenous block into (occupancy, environmental) matrices
// following the frame's channel layout.
std::pair<Matrix, Matrix> split_exo(const Matrix& exo,
                                    const std::vector<Index>& occ_cols,
                                    const std::vector<Index>& env_cols);

struct Prediction {
  Vector forecast;  // vehicles/hour, clamped at 0
  std::vector<AttentionTrace> traces;
};

// Autoregressive multi-step forecast: each extra step appends the previous
// prediction to the history and repeats the last observed exogenous row.
Prediction predict(const ModelParams& params, const ModelConfig& cfg,
                   const SampleWindow& window, Index tau, const NormStats& norm,
                   const std::vector<Index>& occ_cols,
                   const std::vector<Index>& env_cols,
                   const ForwardHooks& hooks = {});

}  // namespace bsx
