// Error hierarchy shared across the library. The CLI maps these to exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace pisd {

// Bad or inconsistent configuration / arguments (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// File and serialization failures (CLI exit code 3).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures: blow-up, non-finite state, domain violations (CLI exit code 4).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pisd
