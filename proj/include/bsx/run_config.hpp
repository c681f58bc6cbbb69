#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "bsx/model.hpp"
#include "bsx/synthetic.hpp"
#include "bsx/training.hpp"

namespace bsx {

// Flat `key = value` run configuration with namespaced keys (model.*,
// train.*, gen.*, data.*, eval.*, baseline.*). Unknown keys are rejected;
// the resolved set embeds into every output artifact.
class RunConfig {
 public:
  static const std::map<std::string, std::string>& known_keys();  // key -> doc

  static RunConfig from_file(const std::string& path);
  RunConfig() = default;

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  Index get_index(const std::string& key, Index fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  // Canonical sorted `key = value` lines of every set key.
  std::string resolved_text() const;
  // FNV-1a hash of resolved_text(), as fixed-width hex.
  std::string fingerprint() const;
  const std::map<std::string, std::string>& entries() const { return values_; }

  GenConfig gen_config() const;
  ModelConfig model_config(Index n_occ, Index n_env) const;
  TrainConfig train_config() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace bsx
