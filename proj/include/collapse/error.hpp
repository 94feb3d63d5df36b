#pragma once

#include <stdexcept>
#include <string>

namespace collapse {

enum class ErrorKind {
  invalid_argument,
  dimension_mismatch,
  integration_failure,
  numerical,
  config,
  internal,
};

const char* to_string(ErrorKind kind);

/// Error raised by every module. `path` names the offending field for
/// configuration errors (e.g. "scenario.m_j") and is empty otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string path = {})
      : std::runtime_error(message), kind_(kind), path_(std::move(path)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& path() const noexcept { return path_; }

 private:
  ErrorKind kind_;
  std::string path_;
};

}  // namespace collapse
