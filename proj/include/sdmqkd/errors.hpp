#pragma once

#include <stdexcept>
#include <string>

namespace sdmqkd {

// Error categories map 1:1 onto the CLI exit codes (see tools/).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

class AnalysisError : public std::runtime_error {
 public:
  explicit AnalysisError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sdmqkd
