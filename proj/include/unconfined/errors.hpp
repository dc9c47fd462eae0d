#pragma once

#include <stdexcept>
#include <string>

namespace unconfined {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or sizes that do not fit together.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A scalar function evaluated outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An argument outside its admissible range (q <= 0, t outside [0,1], ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// The architecture is too narrow for the requested construction.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Inputs violate a documented precondition (infeasible endpoint, nonconvex profile, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A sparse reduction finished but its result failed the norm check.
class ReductionError : public Error {
 public:
  using Error::Error;
};

/// Unreadable, malformed or inconsistent files and configurations.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace unconfined
