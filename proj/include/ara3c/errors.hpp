#pragma once

#include <stdexcept>
#include <string>

namespace ara3c {

// Error taxonomy mirrored by the CLI exit codes (see tools/main.cpp):
// bad configuration, numeric divergence during training, and file I/O.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ara3c
