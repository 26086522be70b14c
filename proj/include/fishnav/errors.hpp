#pragma once

#include <stdexcept>
#include <string>

namespace fishnav {

/// Malformed argument: wrong dimension, empty list, out-of-range parameter.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical configuration that cannot meet its own guarantees
/// (tail bound above tolerance, corrector larger than the control budget, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite state produced while integrating a flow.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A discrete model that violates its declared structure (e.g. a non-injective map).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fishnav
