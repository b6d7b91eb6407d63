#pragma once

#include <stdexcept>
#include <string>

namespace hatsr {

/// Invalid configuration: inconsistent hyperparameters, impossible split
/// constraints, malformed config documents.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid data handed to an operation: shape mismatches, non-finite pixels,
/// unreadable or malformed files.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation produced non-finite values (e.g. training divergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hatsr
