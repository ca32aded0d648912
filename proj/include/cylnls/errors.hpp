// errors.hpp
// Exception types shared by every cylnls module. The C API maps each one to a
// status code; the CLI maps status codes to process exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace cylnls {

/// Malformed or schema-violating run configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integration failure: NaN/overflow, mass drift beyond tolerance (exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A multilinear sum would exceed its configured mode cap (exit code 4).
class ComplexityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem or snapshot-format failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cylnls
