#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smlab {

/// Raised when a caller violates an operation's precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation fails numerically (non-convergence, NaN, blow-up).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonHermitianError : public PreconditionError {
 public:
  NonHermitianError(const std::string& what, double asymmetry)
      : PreconditionError(what), asymmetry_(asymmetry) {}
  double asymmetry() const noexcept { return asymmetry_; }

 private:
  double asymmetry_;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double off_norm)
      : NumericalError(what), off_norm_(off_norm) {}
  double off_diagonal_norm() const noexcept { return off_norm_; }

 private:
  double off_norm_;
};

/// Integration produced a non-finite state or lost a required property.
class StepError : public NumericalError {
 public:
  StepError(const std::string& what, std::size_t step)
      : NumericalError(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace smlab
