#pragma once

#include <stdexcept>
#include <string>

namespace hakg {

/// Caller broke a documented precondition (dimension mismatch, point outside
/// the ball, aperture requested too close to the origin, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed input file. `line()` is 1-based; 0 when not line-specific.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Preprocessing left nothing to train on, or a dataset is otherwise unusable.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A gradient tensor contained NaN/Inf. `tensor()` names the offending parameter.
class NonFiniteGradient : public std::runtime_error {
 public:
  NonFiniteGradient(const std::string& tensor, std::size_t index)
      : std::runtime_error("non-finite gradient in tensor '" + tensor + "' at flat index " +
                           std::to_string(index)),
        tensor_(tensor) {}

  const std::string& tensor() const noexcept { return tensor_; }

 private:
  std::string tensor_;
};

}  // namespace hakg
