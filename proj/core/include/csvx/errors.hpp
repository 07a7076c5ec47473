#pragma once

#include <stdexcept>
#include <string>

namespace csvx {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed inputs, broken invariants, unknown keys. CLI exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration asked for a feature count beyond the 2^n budget.
class CapacityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Missing table entry or unknown observation.
class LookupError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// CVF evaluation failure (e.g. unobserved abstract transition).
class EvalError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Training or value iteration did not meet its gate. CLI exit code 3.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Artifact cache corruption or hash mismatch. CLI exit code 4.
class CacheError : public Error {
 public:
  using Error::Error;
};

}  // namespace csvx
