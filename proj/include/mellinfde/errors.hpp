#pragma once

#include <stdexcept>
#include <string>

namespace mellinfde {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gamma evaluated at 0, -1, -2, ...
class PoleError : public Error {
 public:
  using Error::Error;
};

/// An iterative or adaptive scheme could not certify its tolerance.
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The Mellin integral does not converge on the requested line.
class StripViolationError : public Error {
 public:
  using Error::Error;
};

/// Power-law fit near t = 0 failed (sign changes, non power-like behaviour).
class FitFailureError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// A spectrum expected to describe a real signal is not conjugate symmetric.
class SymmetryViolationError : public Error {
 public:
  using Error::Error;
};

class StepSizeError : public Error {
 public:
  using Error::Error;
};

/// Problem/grid combination rejected by validate_problem.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed or invalid run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mellinfde
