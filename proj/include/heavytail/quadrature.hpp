#pragma once

#include <functional>

namespace heavytail::quad {

using Fn = std::function<double(double)>;

// Adaptive Gauss-Kronrod on a finite interval. Throws NumericError if the
// error estimate stays above 10 * rel_tol * |result|.
double integrate(const Fn& f, double a, double b, double rel_tol = 1e-12);

// Integral over [0, inf). [0, 1] is done directly, [1, inf) after r = 1/t,
// which turns algebraic tails into integrable endpoint behaviour.
double integrate_half_line(const Fn& f, double rel_tol = 1e-12);

// Integral over [c, inf) for c > 0, via r = c / t and tanh-sinh in t.
double integrate_tail(const Fn& f, double c, double rel_tol = 1e-12);

}  // namespace heavytail::quad
