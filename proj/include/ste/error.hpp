#pragma once

#include <stdexcept>
#include <string>

namespace ste {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a contract (bad file, invalid tournament, ties).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Overflow, non-finite intermediate or non-convergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ste
