#pragma once

#include <stdexcept>
#include <string>

namespace dd {

/// Invalid configuration, CLI usage, or input layout. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Failure while running an otherwise valid job (NaN loss, bad checkpoint,
/// rejected matcher, ...). Maps to exit code 3.
class RuntimeFailure : public std::runtime_error {
 public:
  explicit RuntimeFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dd
