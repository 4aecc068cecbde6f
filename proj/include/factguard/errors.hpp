#pragma once

#include <stdexcept>
#include <string>

namespace factguard {

/// Invalid configuration or arguments; maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or malformed input data.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& message, std::size_t line = 0)
      : std::runtime_error(line == 0 ? message : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  /// 1-based line number, 0 when not line-oriented.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A data invariant or cross-reference check failed; maps to exit code 3.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace factguard
