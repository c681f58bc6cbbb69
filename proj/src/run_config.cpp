#include "bsx/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "bsx/errors.hpp"

namespace bsx {

const std::map<std::string, std::string>& RunConfig::known_keys() {
  static const std::map<std::string, std::string> keys = {
      {"data.path", "input CSV (omit to use the synthetic generator)"},
      {"data.routes", "route file for passing-probability analysis"},
      {"data.utc_offset_hours", "local-time offset applied to timestamps"},
      {"gen.days", "synthetic days to generate"},
      {"gen.zones", "occupancy zones"},
      {"gen.env_channels", "environmental channels"},
      {"gen.coupling", "building-traffic coupling in [0,1]"},
      {"gen.lag_hours", "occupancy-to-traffic lag"},
      {"gen.noise_std", "relative noise level"},
      {"gen.seed", "generator seed"},
      {"gen.base_volume", "diurnal base volume, vehicles/hour"},
      {"model.window", "encoder input length L, hours"},
      {"model.horizon", "forecast steps tau"},
      {"model.enc_hidden", "encoder hidden size"},
      {"model.dec_hidden", "decoder hidden size"},
      {"model.variant", "full|no_occupancy|no_environment|"
                        "no_crossdomain_attention|no_temporal_attention|"
                        "no_attention"},
      {"model.dropout", "dropout rate on recurrent outputs"},
      {"train.batch_size", "mini-batch size"},
      {"train.learning_rate", "Adam learning rate"},
      {"train.dropout_rate", "training dropout rate"},
      {"train.max_epochs", "epoch cap"},
      {"train.patience", "early-stop patience, epochs"},
      {"train.seed", "training seed"},
      {"train.beta1", "Adam beta1"},
      {"train.beta2", "Adam beta2"},
      {"train.epsilon", "Adam epsilon"},
      {"train.clip_norm", "global gradient-norm clip"},
      {"train.stride", "training window stride"},
      {"eval.models", "comma-separated model list"},
      {"eval.road", "road to evaluate"},
      {"eval.horizon", "evaluation horizon"},
      {"baseline.arima_p", "ARIMA autoregressive order"},
      {"baseline.arima_d", "ARIMA differencing order"},
      {"baseline.var_lag", "VAR lag"},
  };
  return keys;
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!known_keys().count(key))
    throw ConfigError("unknown config key '" + key + "'");
  values_[key] = value;
}

bool RunConfig::has(const std::string& key) const {
  return values_.count(key) > 0;
}

std::string RunConfig::get_string(const std::string& key,
                                  const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad number '" + it->second +
                      "'");
  }
}

Index RunConfig::get_index(const std::string& key, Index fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  Index v = 0;
  const std::string& s = it->second;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("config key '" + key + "': bad integer '" + s + "'");
  return v;
}

std::uint64_t RunConfig::get_u64(const std::string& key,
                                 std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::uint64_t v = 0;
  const std::string& s = it->second;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("config key '" + key + "': bad integer '" + s + "'");
  return v;
}

std::string RunConfig::resolved_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::string RunConfig::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : resolved_text()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

GenConfig RunConfig::gen_config() const {
  GenConfig g;
  g.days = get_index("gen.days", g.days);
  g.zones = get_index("gen.zones", g.zones);
  g.env_channels = get_index("gen.env_channels", g.env_channels);
  g.coupling = get_double("gen.coupling", g.coupling);
  g.lag_hours = get_index("gen.lag_hours", g.lag_hours);
  g.noise_std = get_double("gen.noise_std", g.noise_std);
  g.seed = get_u64("gen.seed", g.seed);
  g.base_volume = get_double("gen.base_volume", g.base_volume);
  return g;
}

ModelConfig RunConfig::model_config(Index n_occ, Index n_env) const {
  ModelConfig m;
  m.window = get_index("model.window", m.window);
  m.horizon = get_index("model.horizon", m.horizon);
  m.enc_hidden = get_index("model.enc_hidden", m.enc_hidden);
  m.dec_hidden = get_index("model.dec_hidden", m.dec_hidden);
  m.variant = variant_from_string(get_string("model.variant", "full"));
  m.dropout_rate = get_double("model.dropout", 0.2);
  m.n_occ = n_occ;
  m.n_env = n_env;
  return m;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.batch_size = get_index("train.batch_size", t.batch_size);
  t.learning_rate = get_double("train.learning_rate", t.learning_rate);
  t.dropout_rate = get_double("train.dropout_rate", t.dropout_rate);
  t.max_epochs = get_index("train.max_epochs", t.max_epochs);
  t.patience = get_index("train.patience", t.patience);
  t.seed = get_u64("train.seed", t.seed);
  t.beta1 = get_double("train.beta1", t.beta1);
  t.beta2 = get_double("train.beta2", t.beta2);
  t.epsilon = get_double("train.epsilon", t.epsilon);
  t.clip_norm = get_double("train.clip_norm", t.clip_norm);
  t.stride = get_index("train.stride", t.stride);
  return t;
}

}  // namespace bsx
