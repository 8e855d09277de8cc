#pragma once

#include <stdexcept>
#include <string>

namespace pbt {

// Bad arguments: sizes, labels, parities, unnormalized inputs.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A requested dense computation exceeds the size caps.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative solver stopped before reaching its tolerance.
struct ConvergenceError : std::runtime_error {
  double gap = 0.0;
  int iterations = 0;
  ConvergenceError(const std::string& msg, double gap_, int iterations_)
      : std::runtime_error(msg), gap(gap_), iterations(iterations_) {}
};

// A certificate that was expected to hold failed its margin check.
struct CertificateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pbt
