#pragma once

#include <stdexcept>
#include <string>

namespace sdwnet {

// Shape or axis disagreement between tensors/specs. The message names the
// offending axes so callers can report them verbatim.
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad argument values (negative sizes, unknown enum strings, out-of-range
// schedule steps, ...).
class ValueError : public std::runtime_error {
 public:
  explicit ValueError(const std::string& msg) : std::runtime_error(msg) {}
};

// File system / codec failures (missing PNG, corrupt checkpoint, ...).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values where the pipeline requires finite ones.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed run configuration (unknown keys, wrong types).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sdwnet
