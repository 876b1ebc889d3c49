#pragma once

#include <stdexcept>
#include <string>

namespace msw {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ResourceLimitError : public Error {
 public:
  using Error::Error;
};

class MeshQualityError : public Error {
 public:
  using Error::Error;
};

/// Physically invalid state, e.g. nonpositive total depth.
class StateError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values produced during time integration.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class IncompatibleCheckpointError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace msw
