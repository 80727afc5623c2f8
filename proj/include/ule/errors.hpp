// errors.hpp — Exception types shared by the ule library
//
// ValidationError covers bad inputs (the CLI maps it to exit code 2);
// NumericalError covers numerical failures (exit code 3).

#pragma once

#include <stdexcept>
#include <string>

namespace ule {

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Adaptive quadrature ran out of subdivision depth before meeting tolerance.
struct QuadratureError : NumericalError {
    double estimate;
    double error_bound;

    QuadratureError(const std::string& what, double est, double err)
        : NumericalError(what), estimate(est), error_bound(err) {}
};

// Time stepping failed; carries the time reached.
struct PropagationError : NumericalError {
    double time_reached;

    PropagationError(const std::string& what, double t)
        : NumericalError(what), time_reached(t) {}
};

} // namespace ule
