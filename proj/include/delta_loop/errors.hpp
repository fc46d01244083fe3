#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace delta_loop {

/// Bad argument to an operation (winding index, harmonic order, sample count).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation not defined for the machine's winding connection.
class ConfigurationError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Operating point with no well-defined periodic steady state
/// (zero speed with zero resistance, or zero speed for time-domain runs).
class DegenerateOperatingPoint : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Requested harmonic order cannot be represented on the sample grid.
class AliasingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Machine description violates an invariant. `field()` names the offender.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument("field '" + field + "': " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace delta_loop
