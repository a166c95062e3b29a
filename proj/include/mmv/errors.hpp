#pragma once

#include <stdexcept>
#include <string>

namespace mmv {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data, grid mismatches, out-of-range requests.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid user configuration (CLI flags, experiment set-up).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to reach its contract.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  enum class Kind { too_few_points, flat, infeasible, unbounded };

  GeometryError(Kind kind, const std::string& what, double value = 0.0)
      : Error(what), kind_(kind), value_(value) {}

  Kind kind() const noexcept { return kind_; }
  /// Kind-specific payload, e.g. the max-min slack for infeasible systems.
  double value() const noexcept { return value_; }

 private:
  Kind kind_;
  double value_;
};

}  // namespace mmv
