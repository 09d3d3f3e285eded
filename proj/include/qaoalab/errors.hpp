#pragma once

#include <stdexcept>
#include <string>

namespace qaoalab {

/// Invalid input: bad sizes, malformed configuration, out-of-range parameters.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical procedure could not produce a meaningful value.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qaoalab
