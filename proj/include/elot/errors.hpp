#pragma once

#include <stdexcept>
#include <string>

namespace elot {

// Base for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or malformed input files. CLI maps these to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Anything that goes wrong after configuration was accepted. Exit code 3.
class RuntimeError : public Error {
 public:
  using Error::Error;
};

class InvalidGeometryError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

class InsufficientDataError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

class InconsistentMapError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

class InvalidParameterError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

class AllocationInfeasibleError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

class ProtocolViolationError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

class InvariantViolationError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

class IoError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

}  // namespace elot
