#pragma once

#include <stdexcept>
#include <string>

namespace stec {

// Bad input: malformed files, out-of-range fields, invalid configuration.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure while computing on valid input: factorization breakdown,
// divergence, I/O failure.
class ComputeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stec
