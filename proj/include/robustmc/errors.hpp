// errors.hpp -- exception types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace robustmc {

// Invalid configuration or malformed input file. CLI exit code 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numeric routine failed its own consistency check. CLI exit code 2.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem failure while writing artifacts. CLI exit code 3.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace robustmc
