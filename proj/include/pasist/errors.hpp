#pragma once

#include <stdexcept>
#include <string>

namespace pasist {

// Malformed arguments to a library operation (empty sequences, shape
// mismatches in user data, wrong skill id).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid configuration or incompatible network/optimizer dimensions.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss, gradient or parameter during training.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pasist
