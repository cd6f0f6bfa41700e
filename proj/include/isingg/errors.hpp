#pragma once

#include <stdexcept>
#include <string>

namespace isingg {

// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A query needs vertices outside the generated finite ball.
class SaturationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The exact engine was asked for more free spins than its cap allows.
class CapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A statistical check could not reach a verdict (e.g. no Binder crossing on the grid).
class AdvisoryFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace isingg
