#pragma once

#include <stdexcept>
#include <string>

namespace hazrisk {

// Bad or inconsistent input data (schema violations, empty datasets, bad
// parameters). The CLI maps these to exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An estimator could not produce a value for well-formed input. The CLI maps
// these to exit code 3.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Likelihood is monotone in the parameter; no finite maximizer exists.
class DivergenceError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

// Local window holds too little information for the requested polynomial.
class DegenerateWindowError : public EstimationError {
 public:
  DegenerateWindowError(const std::string& what, double anchor, int effective)
      : EstimationError(what), anchor_(anchor), effective_(effective) {}

  double anchor() const { return anchor_; }
  int effective_failures() const { return effective_; }

 private:
  double anchor_;
  int effective_;
};

class ConvergenceError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

class VarianceUndefinedError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

}  // namespace hazrisk
