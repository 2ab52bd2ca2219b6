#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace survmae {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (bad header, non-numeric cell, invalid time or event).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A survival curve that never descends below 1, so no time can be read off it.
class DegenerateCurveError : public Error {
 public:
  using Error::Error;
};

class InsufficientEventsError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A metric whose defining sum is empty (no uncensored subjects, all weights zero, ...).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class MissingGroundTruthError : public Error {
 public:
  using Error::Error;
};

/// Iterative fit stopped at max_iter; carries the last parameter vector.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> last_iterate)
      : Error(what), last_iterate_(std::move(last_iterate)) {}

  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

 private:
  std::vector<double> last_iterate_;
};

/// Monotone partial likelihood: some coefficient diverges.
class SeparationError : public Error {
 public:
  using Error::Error;
};

}  // namespace survmae
