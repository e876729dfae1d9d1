#pragma once

#include <stdexcept>
#include <string>

namespace macs {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration; the message names the violated constraint.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// Model training failures (degenerate labels, non-convergence).
class TrainError : public Error {
 public:
  explicit TrainError(const std::string& msg) : Error(msg) {}
};

// A statistic or metric could not be computed.
class MetricError : public Error {
 public:
  explicit MetricError(const std::string& msg) : Error(msg) {}
};

// Pipeline stage failure; carries the stage name and the cause.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& cause)
      : Error("[" + stage + "] " + cause), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace macs
