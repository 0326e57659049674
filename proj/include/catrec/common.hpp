#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace catrec {

using Index = std::uint32_t;
using Timestamp = std::int64_t;

constexpr Timestamp kSecondsPerDay = 86400;

// Malformed or degenerate input data (empty splits, zero variance, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or argument outside an operation's precondition.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A required file (input or upstream stage artifact) does not exist.
class MissingArtifact : public std::runtime_error {
 public:
  explicit MissingArtifact(const std::string& path)
      : std::runtime_error("missing artifact: " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Optimization produced a non-finite value.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int epoch = -1)
      : std::runtime_error(epoch >= 0 ? what + " (epoch " + std::to_string(epoch) + ")" : what),
        epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace catrec
