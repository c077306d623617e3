#pragma once

#include <stdexcept>
#include <string>

namespace isolandau {

// Error taxonomy mirrored by the CLI exit codes: configuration and usage
// problems exit 2, numerical blow-ups exit 3, resource limits exit 4.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    NumericalError(const std::string& msg, long step = -1, double time = 0.0)
        : std::runtime_error(msg), step_index(step), t(time) {}
    long step_index;
    double t;
};

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace isolandau
