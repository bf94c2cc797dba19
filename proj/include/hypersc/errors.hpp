#pragma once

#include <stdexcept>
#include <string>

namespace hypersc {

/// Caller violated a precondition (dimension mismatch, wrong base point, bad argument).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data failed validation (point off the sheet, malformed file).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation point lies outside the domain of a field.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hessian is not positive definite where the theory requires it.
class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iteration cap was hit or a certified per-step bound failed.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hypersc
