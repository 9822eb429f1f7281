#pragma once

#include <stdexcept>
#include <string>

namespace webcent {

// Base for every error raised by the library. Messages are meant to be shown
// to users verbatim.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Violated precondition on a pure computation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace webcent
