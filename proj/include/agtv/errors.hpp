#pragma once

#include <stdexcept>
#include <string>

namespace agtv {

// Bad user input: maps to CLI exit code 2.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Diverged or produced non-finite iterates: maps to CLI exit code 3.
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace agtv
