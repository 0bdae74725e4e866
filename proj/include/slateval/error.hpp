#pragma once

#include <stdexcept>
#include <string>

namespace slateval {

/// Input that violates a structural contract (invalid slate, bad probability table).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid run configuration (zero Monte Carlo samples, bad delta, unknown config key).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Text input that could not be parsed. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A logged slate has zero logging propensity where the target needs it.
class AbsoluteContinuityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Estimate is 0/0, e.g. self-normalized IPS with all weights zero.
class UndefinedEstimateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lookup of a context the object has no data for.
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace slateval
