#pragma once

#include <stdexcept>
#include <string>

namespace mcvc {

// Base error for every failure raised by the library. Callers that only care
// about "something went wrong in mcvc" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent on-disk artifact (bad magic, shape mismatch, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Precondition violation on an operation's inputs.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace mcvc
