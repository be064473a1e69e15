#pragma once

#include <stdexcept>
#include <string>

namespace ratchet {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a function (e.g. y <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inputs violate a stated precondition (grid too narrow, bad habit grid, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Model parameters or configuration fail validation. `field` is a dotted path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// An iterative scheme failed to converge. Carries the last residual.
class SchemeError : public Error {
 public:
  SchemeError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Numerical data violate an expected structural property (monotonicity, ordering).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A query falls outside the computational box.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// The Legendre supremum is not attained inside the representable range.
class UnboundedTransformError : public Error {
 public:
  using Error::Error;
};

/// A numbered pipeline stage failed. `stage` names it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace ratchet
