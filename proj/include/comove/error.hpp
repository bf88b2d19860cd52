#pragma once

#include <stdexcept>
#include <string>

namespace comove {

// Bad input files, malformed rows, config violations, missing upstream stages.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Estimation failures: rank-deficient designs, Cholesky failure, no stable fits.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace comove
