#pragma once

#include <stdexcept>
#include <string>

namespace orderspec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or non-finite numeric input.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Too few observations for the requested lag/embedding configuration.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Invalid user configuration (parameters out of range, bad combinations).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Shape mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Problems in ingested data files (parse failures, duplicates).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed (indefinite input, singular design).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace orderspec
