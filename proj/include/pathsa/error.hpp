#pragma once

#include <stdexcept>
#include <string>

namespace pathsa {

/// A parameter lies outside the domain on which an operation is defined.
class RangeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two objects that must share a shape (mode count, dimension) do not.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A recursion step with gamma * lambda >= 1 no longer contracts.
class DivergenceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A martingale increment generator produced a draw above its declared bound.
class SpecViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A linear system too ill-conditioned to trust.
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration text. line() is 1-based, 0 when not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace pathsa
