#pragma once

#include <stdexcept>
#include <string>

namespace ppg2ecg {

/// Malformed input data, configuration or arguments.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite value; message carries the state dump.
class NumericalAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A checkpoint was produced under a different configuration.
class FingerprintMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ppg2ecg
