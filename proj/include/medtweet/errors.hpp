#pragma once

#include <stdexcept>
#include <string>

namespace medtweet {

// Base class for everything this library throws.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem trouble: missing files, unwritable paths.
class io_error : public error {
 public:
  using error::error;
};

// Malformed file contents. Carries "path:line:" context when known.
class format_error : public error {
 public:
  using error::error;
  format_error(const std::string& path, std::size_t line, const std::string& what)
      : error(path + ":" + std::to_string(line) + ": " + what) {}
};

// Caller violated an operation precondition.
class invalid_input : public error {
 public:
  using error::error;
};

// Bad run configuration: unknown backend, mismatched encoder, invalid hyperparameter.
class config_error : public error {
 public:
  using error::error;
};

// Gold/prediction sets cannot be evaluated against each other.
class eval_error : public error {
 public:
  using error::error;
};

}  // namespace medtweet
