#pragma once
// Error types. Every failure the library can report is one of these; the CLI
// maps the families onto process exit codes.

#include <stdexcept>
#include <string>

namespace gspec {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument values or incompatible shapes.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A size guard was exceeded (e.g. an exterior power that is too large).
class CapacityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An iteration failed to converge or a factorization hit an invalid pivot.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class NotPositiveDefinite : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// Training produced non-finite weights.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Bad experiment configuration (CLI / JSON).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gspec
