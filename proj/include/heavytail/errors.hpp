#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace heavytail {

// Bad argument: NaN input, parameter out of range, unknown enum value.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A requested moment of the target is infinite.
struct MomentUndefined : std::domain_error {
    using std::domain_error::domain_error;
};

struct UnsupportedFamily : std::logic_error {
    using std::logic_error::logic_error;
};

// Quadrature or root finding did not reach its tolerance.
struct NumericError : std::runtime_error {
    NumericError(const std::string& what, double achieved = 0.0)
        : std::runtime_error(what), achieved_tolerance(achieved) {}
    double achieved_tolerance;
};

// A hypothesis needed by a calculation fails numerically (e.g. g not convex).
struct AssumptionViolated : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace heavytail
