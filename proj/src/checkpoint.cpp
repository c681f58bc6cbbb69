#include "bsx/checkpoint.hpp"

#include <fstream>
#include <json.hpp>

#include "bsx/errors.hpp"

namespace bsx {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json matrix_to_json(const Matrix& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = to_row_major(m);
  return j;
}

Matrix matrix_from_json(const json& j) {
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Index>(data.size()) != rows * cols)
    throw DataError("checkpoint: matrix data length does not match shape");
  return from_row_major(rows, cols, data);
}

}  // namespace

std::string Checkpoint::to_json() const {
  json j;
  j["format_version"] = kFormatVersion;
  j["tool_version"] = BSX_VERSION;
  j["model"] = {
      {"window", config.window},
      {"horizon", config.horizon},
      {"n_occ", config.n_occ},
      {"n_env", config.n_env},
      {"enc_hidden", config.enc_hidden},
      {"dec_hidden", config.dec_hidden},
      {"variant", to_string(config.variant)},
      {"dropout_rate", config.dropout_rate},
  };
  j["norm"] = {
      {"channel_mean", std::vector<double>(norm.channel_mean.begin(),
                                           norm.channel_mean.end())},
      {"channel_std", std::vector<double>(norm.channel_std.begin(),
                                          norm.channel_std.end())},
      {"traffic_mean", norm.traffic_mean},
      {"traffic_std", norm.traffic_std},
  };
  json jp = json::object();
  params.visit([&](const char* name, const Matrix& m) {
    jp[name] = matrix_to_json(m);
  });
  j["params"] = jp;
  return j.dump(2);
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint " + path);
  out << to_json() << "\n";
}

Checkpoint Checkpoint::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  if (j.at("format_version").get<int>() != kFormatVersion)
    throw DataError("checkpoint: unsupported format version");

  Checkpoint ck;
  const json& jm = j.at("model");
  ck.config.window = jm.at("window").get<Index>();
  ck.config.horizon = jm.at("horizon").get<Index>();
  ck.config.n_occ = jm.at("n_occ").get<Index>();
  ck.config.n_env = jm.at("n_env").get<Index>();
  ck.config.enc_hidden = jm.at("enc_hidden").get<Index>();
  ck.config.dec_hidden = jm.at("dec_hidden").get<Index>();
  ck.config.variant = variant_from_string(jm.at("variant").get<std::string>());
  ck.config.dropout_rate = jm.at("dropout_rate").get<double>();
  ck.config.validate();

  const json& jn = j.at("norm");
  const auto cm = jn.at("channel_mean").get<std::vector<double>>();
  const auto cs = jn.at("channel_std").get<std::vector<double>>();
  ck.norm.channel_mean =
      Eigen::Map<const Vector>(cm.data(), static_cast<Index>(cm.size()));
  ck.norm.channel_std =
      Eigen::Map<const Vector>(cs.data(), static_cast<Index>(cs.size()));
  ck.norm.traffic_mean = jn.at("traffic_mean").get<double>();
  ck.norm.traffic_std = jn.at("traffic_std").get<double>();

  ck.params = ModelParams::zeros(ck.config);
  const json& jp = j.at("params");
  ck.params.visit([&](const char* name, Matrix& m) {
    if (!jp.contains(name))
      throw DataError(std::string("checkpoint: missing parameter ") + name);
    Matrix loaded = matrix_from_json(jp.at(name));
    if (loaded.rows() != m.rows() || loaded.cols() != m.cols())
      throw DataError(std::string("checkpoint: parameter ") + name +
                      " has shape " + shape_str(loaded) + ", expected " +
                      shape_str(m));
    m = std::move(loaded);
  });
  return ck;
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

}  // namespace bsx
