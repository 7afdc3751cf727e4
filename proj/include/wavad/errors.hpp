#pragma once

#include <stdexcept>

namespace wavad {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad dimensions, unknown names, invalid configuration values.
struct ConfigError : Error {
  using Error::Error;
};

// Input too short for a valid convolution / the network's receptive field.
struct InsufficientContextError : Error {
  using Error::Error;
};

// Unsupported or corrupt file contents.
struct FormatError : Error {
  using Error::Error;
};

// Missing or inconsistent corpus data (empty pools, label mismatches, ...).
struct DataError : Error {
  using Error::Error;
};

// A requested metric has no defined value (single-class AUC, silent SNR
// reference). Deliberately not mapped to a default value.
struct UndefinedMetricError : DataError {
  using DataError::DataError;
};

// Non-finite loss during training.
struct TrainingDivergedError : Error {
  using Error::Error;
};

}  // namespace wavad
