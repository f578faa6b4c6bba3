#pragma once

#include <stdexcept>
#include <string>

namespace wtraj {

/// Base class for every failure raised by the simulator.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A propagator or evolution was requested with t_to <= t_from.
class DegenerateTimeError : public Error {
 public:
  using Error::Error;
};

/// An argument violates a documented precondition (time ordering, positivity).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The pre/post overlap is too small for a weak value to be defined.
class VanishingOverlapError : public Error {
 public:
  using Error::Error;
};

/// A probe coupling is too strong for the first-order pointer model.
class FirstOrderGuardError : public Error {
 public:
  explicit FirstOrderGuardError(std::string probe_id, const std::string& what)
      : Error(what), probe_id_(std::move(probe_id)) {}
  const std::string& probe_id() const noexcept { return probe_id_; }

 private:
  std::string probe_id_;
};

/// Recovered rotation outside the unambiguous arccos branch.
class BranchGuardError : public Error {
 public:
  using Error::Error;
};

/// Configuration file could not be parsed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line) : Error(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Configuration parsed but violates an invariant; `field` is the dotted path.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace wtraj
