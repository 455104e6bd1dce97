#pragma once

#include <stdexcept>
#include <string>

namespace cova {

// Every failure carries a short machine-readable kind; the CLI prints
// "error: <kind>: <message>".
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct InputError : Error {
  explicit InputError(const std::string& m) : Error("input", m) {}
};

struct DegenerateVectorError : Error {
  explicit DegenerateVectorError(const std::string& m)
      : Error("degenerate-vector", m) {}
};

struct EmptyInputError : Error {
  explicit EmptyInputError(const std::string& m) : Error("empty-input", m) {}
};

struct EmptyAudioError : Error {
  explicit EmptyAudioError(const std::string& m) : Error("empty-audio", m) {}
};

struct BatchTooSmallError : Error {
  explicit BatchTooSmallError(const std::string& m)
      : Error("batch-too-small", m) {}
};

struct NumericsError : Error {
  explicit NumericsError(const std::string& m) : Error("numerics", m) {}
};

struct LoadError : Error {
  explicit LoadError(const std::string& m) : Error("load", m) {}
};

struct CheckpointError : Error {
  explicit CheckpointError(const std::string& m) : Error("checkpoint", m) {}
  CheckpointError(std::string kind, const std::string& m)
      : Error(std::move(kind), m) {}
};

struct ConfigMismatchError : CheckpointError {
  explicit ConfigMismatchError(const std::string& m)
      : CheckpointError("config-mismatch", m) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error("config", m) {}
};

struct TrainingError : Error {
  explicit TrainingError(const std::string& m) : Error("training", m) {}
};

}  // namespace cova
