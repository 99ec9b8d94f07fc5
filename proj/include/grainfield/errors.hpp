#pragma once

#include <stdexcept>
#include <string>

namespace grainfield {

// Base of every error raised by the library. The CLI maps the concrete type
// to an exit code (see tools/grainfield.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or precondition violation.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A grain schedule that does not fit the render target.
class ScheduleError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

// Malformed or unsupported file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Inconsistent external data (missing files, bad manifests, missing rows).
class DataError : public Error {
 public:
  using Error::Error;
};

class StatisticsError : public Error {
 public:
  using Error::Error;
};

}  // namespace grainfield
