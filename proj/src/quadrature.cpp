#include "heavytail/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <string>

#include "heavytail/errors.hpp"

namespace heavytail::quad {

namespace {

constexpr double kAbsFloor = 1e-300;

void check(double value, double err, double rel_tol, const char* where) {
    if (!std::isfinite(value))
        throw NumericError(std::string(where) + ": non-finite integral");
    double scale = std::abs(value);
    if (err > rel_tol * scale + kAbsFloor) {
        throw NumericError(std::string(where) + ": tolerance not reached", scale > 0 ? err / scale : err);
    }
}

}  // namespace

double integrate(const Fn& f, double a, double b, double rel_tol) {
    if (a == b) return 0.0;
    double err = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 25, rel_tol, &err);
    const double tol = std::max(rel_tol, 1e-14) * 10;
    if (std::isfinite(v) && err <= tol * std::abs(v) + kAbsFloor) return v;
    // Endpoint singularities such as r^0.4 at 0 defeat Gauss-Kronrod.
    thread_local boost::math::quadrature::tanh_sinh<double> ts(15);
    double l1 = 0.0;
    std::size_t levels = 0;
    v = ts.integrate(f, a, b, rel_tol, &err, &l1, &levels);
    check(v, err, tol, "tanh_sinh");
    return v;
}

double integrate_tail(const Fn& f, double c, double rel_tol) {
    if (!(c > 0.0)) throw NumericError("integrate_tail: split point must be positive");
    auto g = [&](double t) {
        if (t <= 0.0) return 0.0;
        double v = f(c / t) * c / (t * t);
        return std::isfinite(v) ? v : 0.0;
    };
    boost::math::quadrature::tanh_sinh<double> ts(15);
    double err = 0.0, l1 = 0.0;
    std::size_t levels = 0;
    double v = ts.integrate(g, 0.0, 1.0, rel_tol, &err, &l1, &levels);
    check(v, err, std::max(rel_tol, 1e-14) * 10, "tanh_sinh tail");
    return v;
}

double integrate_half_line(const Fn& f, double rel_tol) {
    double head = integrate(f, 0.0, 1.0, rel_tol);
    double tail = integrate_tail(f, 1.0, rel_tol);
    return head + tail;
}

}  // namespace heavytail::quad
