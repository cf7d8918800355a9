#pragma once

#include <stdexcept>
#include <string>

namespace dsy {

// Invalid user-supplied configuration: unknown names, bad shapes, missing
// parameters. Maps to exit code 1 at the CLI boundary.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
};

// Numerical failure during a computation that was configured correctly:
// diverged integration, failed factorization. Maps to exit code 2.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace dsy
