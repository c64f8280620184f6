// Error types thrown across the library. The CLI maps them to exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace pklab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// elementary function evaluated outside its domain at the base point
struct DomainError : Error {
  using Error::Error;
};

struct DegenerateMetricError : Error {
  DegenerateMetricError(const std::string& what, double det)
      : Error(what), det(det) {}
  double det;
};

// 2-form with a symmetric part, metric with antisymmetric part, ...
struct MalformedTensorError : Error {
  using Error::Error;
};

// catalog constructor precondition failed on the box
struct ConstraintError : Error {
  using Error::Error;
};

// bad user input: unknown family, bad expression, bad flags
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace pklab
