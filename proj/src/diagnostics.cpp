#include "heavytail/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "heavytail/errors.hpp"
#include "heavytail/quadrature.hpp"

namespace heavytail {

namespace {

void check_q(double q) {
    if (!(q > 1.0) || !std::isfinite(q)) throw DomainError("q must be a finite number > 1");
}

// pi(X <= x) for a symmetric 1D target.
double cdf_1d(const PotentialSpec& spec, double x) {
    if (x <= 0.0) return 0.5 * radial_tail(spec, -x);
    return 1.0 - 0.5 * radial_tail(spec, x);
}

double upper_1d(const PotentialSpec& spec, double x) {
    if (x >= 0.0) return 0.5 * radial_tail(spec, x);
    return 1.0 - 0.5 * radial_tail(spec, -x);
}

// Smallest R with pi(||x|| >= R) <= mass, by bisection on log R.
double tail_quantile(const PotentialSpec& spec, double mass) {
    double lo = 1e-8, hi = 1.0;
    while (radial_tail(spec, hi) > mass) {
        lo = hi;
        hi *= 4.0;
        if (hi > 1e300) throw NumericError("tail quantile search did not bracket");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        double mid = std::sqrt(lo * hi);
        (radial_tail(spec, mid) > mass ? lo : hi) = mid;
    }
    return hi;
}

}  // namespace

RenyiSurrogate renyi_lower_bound(double m2, double q, double pi_moment) {
    check_q(q);
    if (!(m2 > 0.0) || !std::isfinite(m2)) throw DomainError("m2 must be positive and finite");
    if (std::isinf(pi_moment)) throw MomentUndefined("pi moment of order 2q/(q-1) is infinite");
    if (!(pi_moment > 0.0)) throw DomainError("pi_moment must be positive");
    double raw = q / (q - 1.0) * std::log(m2) - std::log(pi_moment);
    return {q, pi_moment, std::max(raw, 0.0), raw, raw < 0.0};
}

double surrogate_pi_moment(const PotentialSpec& spec, double q) {
    check_q(q);
    validate(spec);
    const double p = 2.0 * q / (q - 1.0);
    switch (spec.family) {
        case Family::GenCauchy:
        case Family::Gaussian: return closed_form_moment(spec, p).value;
        case Family::Sublinear:
        case Family::RadialCustom: return radial_moment(spec, p);
    }
    throw UnsupportedFamily("unknown family");
}

double sigma2_eps(const PotentialSpec& spec, double q, double eps) {
    if (!(eps >= 0.0)) throw DomainError("eps must be non-negative");
    const double e = (q - 1.0) / q;
    return std::exp(e * eps + e * std::log(surrogate_pi_moment(spec, q)));
}

std::vector<double> comparison_process_z(const PotentialSpec& spec, double h, double z0, std::size_t k_max) {
    validate(spec);
    if (!(h >= 0.0) || !std::isfinite(h)) throw DomainError("h must be non-negative");
    if (!(z0 >= 0.0) || !std::isfinite(z0)) throw DomainError("z0 must be non-negative");
    auto g = [&](double r) {
        double c = 1.0 - 2.0 * h * radial_fprime(spec, r);
        return c * c * r;
    };
    std::vector<double> z{z0};
    z.reserve(k_max + 1);
    for (std::size_t k = 0; k < k_max; ++k) {
        double next = g(z.back()) + 2.0 * h * spec.d;
        if (!std::isfinite(next)) throw NumericError("comparison process overflowed");
        z.push_back(next);
    }

    auto [mn, mx] = std::minmax_element(z.begin(), z.end());
    if (*mx > *mn) {
        constexpr int kGrid = 257;
        std::vector<double> gv(kGrid);
        const double step = (*mx - *mn) / (kGrid - 1);
        for (int i = 0; i < kGrid; ++i) gv[i] = g(*mn + i * step);
        double scale = 0.0;
        for (double v : gv) scale = std::max(scale, std::abs(v));
        const double tol = 1e-10 * scale;
        for (int i = 0; i + 1 < kGrid; ++i)
            if (gv[i + 1] < gv[i] - tol)
                throw AssumptionViolated("g(r) = (1 - 2h f'(r))^2 r decreases near r = " +
                                         std::to_string(*mn + i * step));
        for (int i = 1; i + 1 < kGrid; ++i)
            if (gv[i + 1] - 2.0 * gv[i] + gv[i - 1] < -tol)
                throw AssumptionViolated("g(r) = (1 - 2h f'(r))^2 r is not convex near r = " +
                                         std::to_string(*mn + i * step));
    }
    return z;
}

std::optional<std::uint64_t> iterations_to_threshold(const MomentTrace& trace, double threshold) {
    if (!(threshold > 0.0)) throw DomainError("threshold must be positive");
    for (std::size_t i = 0; i < trace.iters.size(); ++i)
        if (trace.m2[i] + 2.0 * trace.se[i] < threshold) return trace.iters[i];
    return std::nullopt;
}

HistRenyi hist_renyi_1d(const std::vector<double>& samples, const PotentialSpec& spec, double q, int n_bins,
                        double lo, double hi) {
    validate(spec);
    check_q(q);
    if (spec.d != 1) throw DomainError("hist_renyi_1d needs d = 1");
    if (n_bins < 1) throw DomainError("n_bins must be >= 1");
    if (samples.empty()) throw DomainError("no samples");
    if (lo == hi) {
        hi = tail_quantile(spec, 1e-4);
        lo = -hi;
    }
    if (!(lo < hi)) throw DomainError("range must satisfy lo < hi");
    const double below = cdf_1d(spec, lo), above = upper_1d(spec, hi);
    if (below + above > 1e-4 * (1.0 + 1e-9))
        throw DomainError("range [lo, hi] leaves more than 1e-4 of the target mass outside");

    HistRenyi out{0.0, n_bins, lo, hi, {}};
    const double width = (hi - lo) / n_bins;
    const double log_z = log_normalizing_constant(spec);
    auto density = [&](double x) { return std::exp(-radial_f(spec, x * x) - log_z); };

    // Bin 0 is (-inf, lo), bin n_bins + 1 is [hi, inf).
    std::vector<double> mass(n_bins + 2);
    mass[0] = below;
    mass[n_bins + 1] = above;
    for (int i = 0; i < n_bins; ++i) mass[i + 1] = quad::integrate(density, lo + i * width, lo + (i + 1) * width, 1e-10);

    std::vector<std::size_t> counts(n_bins + 2, 0);
    for (double x : samples) {
        if (!std::isfinite(x)) throw DomainError("non-finite sample");
        std::size_t b;
        if (x < lo) {
            b = 0;
        } else if (x >= hi) {
            b = n_bins + 1;
        } else {
            b = 1 + std::min<std::size_t>(n_bins - 1, static_cast<std::size_t>((x - lo) / width));
        }
        ++counts[b];
    }

    const double n = static_cast<double>(samples.size());
    std::vector<double> log_terms;
    std::size_t empty_heavy = 0;
    for (std::size_t b = 0; b < counts.size(); ++b) {
        if (counts[b] == 0) {
            if (mass[b] > 1e-6) ++empty_heavy;
            continue;
        }
        if (mass[b] <= 0.0) {
            out.value = std::numeric_limits<double>::infinity();
            out.warnings.push_back("samples fall where the target has no mass");
            return out;
        }
        log_terms.push_back(q * std::log(counts[b] / n) + (1.0 - q) * std::log(mass[b]));
    }
    double mx = *std::max_element(log_terms.begin(), log_terms.end());
    double s = 0.0;
    for (double t : log_terms) s += std::exp(t - mx);
    out.value = (mx + std::log(s)) / (q - 1.0);
    if (empty_heavy > 0 && q > 2.0)
        out.warnings.push_back("estimator unstable: " + std::to_string(empty_heavy) +
                               " empty bins carry target mass above 1e-6");
    return out;
}

nlohmann::json diagnostic_report(const RenyiSurrogate& s, std::optional<std::uint64_t> hit_iter, double threshold) {
    nlohmann::json j;
    j["q"] = s.q;
    j["surrogate"] = s.value;
    j["clamped"] = s.clamped;
    j["hit_iter"] = hit_iter ? nlohmann::json(*hit_iter) : nlohmann::json(nullptr);
    j["threshold"] = threshold;
    return j;
}

}  // namespace heavytail
