#pragma once

#include <stdexcept>
#include <string>

namespace krylov {

// Invalid input or configuration. The CLI maps these to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation (e.g. angles).
class DomainError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Base of all numerical failures. The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TargetOutOfSpectrum : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class LossOfOrthogonality : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoExtremumFound : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace krylov
