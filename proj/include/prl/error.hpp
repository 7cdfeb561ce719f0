#pragma once

#include <stdexcept>
#include <string>

namespace prl {

/// Base of every error raised by the library. The CLI maps the concrete
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bad dataset contents, file format violations, infeasible sampling
/// requests (exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, shape mismatches and other numeric contract
/// violations (exit code 4).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace prl
