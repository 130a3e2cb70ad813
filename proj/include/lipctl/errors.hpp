#pragma once

#include <stdexcept>
#include <string>

namespace lipctl {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied something that violates a precondition or cannot be parsed.
class InputError : public Error {
 public:
  using Error::Error;
};

// A configured size cap (box count, sequence length) would be exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// A construction needs more sequence points than are available.
class InsufficientPointsError : public InputError {
 public:
  using InputError::InputError;
};

// The per-ball density quota cannot be met within the truncation horizon.
class NotDenseEnoughError : public InputError {
 public:
  using InputError::InputError;
};

// A moving map fails the boundary hypotheses of the crossing lemma.
class HypothesisError : public InputError {
 public:
  using InputError::InputError;
};

// Approximate search did not reach its tolerance.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// An internal consistency check failed. Always a bug, never a legal outcome.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace lipctl
