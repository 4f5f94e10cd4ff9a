#pragma once

#include <stdexcept>
#include <string>

namespace dikf {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition (shape mismatch, bad argument).
struct ContractError : Error {
  using Error::Error;
};

struct DimensionError : ContractError {
  using ContractError::ContractError;
};

// Bad user-facing configuration (CLI / config file level).
struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// Numerical failures: these map to a distinct process exit code.
struct NumericalError : Error {
  using Error::Error;
};

struct PsdViolationError : NumericalError {
  using NumericalError::NumericalError;
};

struct RankDeficiencyError : NumericalError {
  using NumericalError::NumericalError;
};

struct DegenerateMapError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace dikf
