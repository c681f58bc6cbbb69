#pragma once

#include <string>

#include "bsx/dataset.hpp"
#include "bsx/model.hpp"

namespace bsx {

// Versioned JSON container for a trained model: config, normalization
// statistics and every named parameter with its shape. Doubles serialize in
// shortest round-trip form, so save -> load -> save is byte-identical.
struct Checkpoint {
  ModelConfig config;
  NormStats norm;
  ModelParams params;

  void save(const std::string& path) const;
  std::string to_json() const;
  static Checkpoint load(const std::string& path);
  static Checkpoint from_json(const std::string& text);
};

}  // namespace bsx
