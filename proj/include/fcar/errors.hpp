#pragma once

#include <stdexcept>
#include <string>

namespace fcar {

// Base class for all errors thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid input: dimension mismatch, broken invariant, malformed config or
// file. The CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Numeric failure: singular precision matrix, degenerate operator,
// non-finite objective. The CLI maps these to exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace fcar
