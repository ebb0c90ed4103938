#pragma once

#include <stdexcept>
#include <string>

namespace landau {

// Invalid caller input (bad argument values, empty ensembles, q < 1, ...).
struct argument_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Geometry/flux incompatibilities, windows leaving the sample, bad boundary.
struct geometry_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Invalid disorder-model parameters (eta <= 0, constant outside support, ...).
struct parameter_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Requested problem exceeds a configured dimension cap.
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure; carries the offending residual.
struct numerical_error : std::runtime_error {
    double residual;
    numerical_error(const std::string& msg, double res)
        : std::runtime_error(msg), residual(res) {}
};

// Degenerate data handed to a least-squares fit.
struct fit_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sampled time grid too coarse for a requested time average.
struct resolution_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace landau
