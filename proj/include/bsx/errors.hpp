#pragma once

#include <stdexcept>
#include <string>

namespace bsx {

// Error categories map 1:1 onto CLI exit codes (config=2, data=3, numeric=4).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace bsx
