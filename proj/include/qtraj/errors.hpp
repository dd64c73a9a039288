#pragma once

#include <stdexcept>
#include <string>

namespace qtraj {

// Raised for malformed scenario files, bad parameters, and violated
// construction preconditions. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a simulation stage fails (non-convergence, NaN fields,
// degenerate metric after retries, ...). The CLI maps this to exit code 1.
struct PhysicsError : std::runtime_error {
  explicit PhysicsError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace qtraj
