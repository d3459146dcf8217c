#pragma once

#include <stdexcept>
#include <string>

namespace amlab {

// Maps to CLI exit code 2.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Bad caller-supplied data (non-finite input, grid mismatch, ...).
struct input_error : std::runtime_error {
  explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Query outside the region where a model is defined.
struct domain_error : std::runtime_error {
  explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// An inner solve failed to converge.  Maps to CLI exit code 3.
struct numerical_error : std::runtime_error {
  numerical_error(const std::string& what, std::string log = {})
      : std::runtime_error(what), iteration_log(std::move(log)) {}
  std::string iteration_log;
};

}  // namespace amlab
