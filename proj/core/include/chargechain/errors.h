#ifndef CHARGECHAIN_ERRORS_H_
#define CHARGECHAIN_ERRORS_H_

#include <stdexcept>
#include <string>

namespace chargechain {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reference to something that is not part of the state space (unknown end
// id, state outside a finite space, missing end limit).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Operation called outside its contract (signed input to a lattice
// primitive, non-invariant measure passed to a classifier, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Exact enumeration requested beyond its supported size.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Kernel lacks the structure an operation needs (no tail row, countable
// kernel given to a finite-only routine).
class StructureError : public Error {
 public:
  using Error::Error;
};

// Malformed input: chain specs, measure literals, catalog parameters.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace chargechain

#endif  // CHARGECHAIN_ERRORS_H_
