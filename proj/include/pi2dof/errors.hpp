#pragma once

#include <stdexcept>
#include <string>

namespace pi2dof {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: inconsistent dimensions, out-of-range parameters, malformed
/// configuration. The CLI maps this family to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

class DomainError : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

/// A computation that cannot produce a meaningful number. Exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A closed-loop matrix is not Hurwitz (continuous) or not Schur (discrete).
/// For cost evaluation this is how f(K) = +inf is reported.
class StabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IdentificationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EstimationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A simulated state became non-finite.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, double time)
      : NumericalError(what), time_(time) {}

  /// Simulated time at which the state stopped being finite.
  double time() const noexcept { return time_; }

  /// Position of the failing rollout inside a gradient estimate; -1 when
  /// not applicable.
  long iteration = -1;
  long direction = -1;
  long pair = -1;
  long sample = -1;

 private:
  double time_;
};

}  // namespace pi2dof
