#pragma once

#include <stdexcept>
#include <string>

namespace umc {

// Error taxonomy mirrored by the CLI exit codes: validation failures exit
// with 2, non-convergence with 3, resource guards with 4.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace umc
