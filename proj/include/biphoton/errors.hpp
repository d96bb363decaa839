#pragma once

#include <stdexcept>
#include <string>

namespace biphoton {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Short machine-readable kind, used by the CLI error line.
  virtual const char* kind() const noexcept { return "error"; }
};

/// A precondition on the arguments was not met (wrong domain tag, invalid grid, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "contract_violation"; }
};

/// The sampling grid cannot represent the requested result.
class ResolutionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "resolution"; }
};

/// A formula was evaluated outside its mathematical domain (e.g. k''z = 0).
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

/// A requested window or crossing lies outside the available span.
class RangeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "range"; }
};

/// The coincidence model has no mass to sample from.
class EmptyModelError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "empty_model"; }
};

/// The data do not constrain the fit parameters.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "rank_deficient"; }
};

/// Malformed input files (histogram CSV, reports).
class FormatError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "format"; }
};

/// Visibility of two zero counts.
class UndefinedVisibility : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "undefined_visibility"; }
};

}  // namespace biphoton
