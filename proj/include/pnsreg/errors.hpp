#pragma once

#include <stdexcept>
#include <string>

namespace pnsreg {

// Invalid or inconsistent input data (bad file, bad composition, dimension
// mismatch, rank-deficient design). CLI maps this to exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (degenerate geometry, divergence, out-of-range lift).
// CLI maps this to exit code 4.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pnsreg
