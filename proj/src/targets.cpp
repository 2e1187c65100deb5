#include "heavytail/targets.hpp"

#include <algorithm>
#include <cmath>
// Boost 1.74 pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

#include "heavytail/errors.hpp"
#include "heavytail/quadrature.hpp"
#include "heavytail/rng.hpp"

namespace heavytail {

namespace {

constexpr double kPi = std::numbers::pi;

bool finite_vec(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

// log of the unnormalized radial integrand r^(k) exp(-f(r^2)).
double log_radial(const PotentialSpec& spec, double r, double k) {
    if (r <= 0.0) return k == 0.0 ? -radial_f(spec, 0.0) : -INFINITY;
    return k * std::log(r) - radial_f(spec, r * r);
}

// Location of the peak of r^k exp(-f(r^2)) on a log grid; used to center and
// scale the radial quadratures.
struct Peak {
    double r;
    double logv;
    double split = 1.0;
};

Peak radial_peak(const PotentialSpec& spec, double k) {
    Peak best{1.0, log_radial(spec, 1.0, k), 1.0};
    for (int i = 0; i <= 3600; ++i) {
        double r = std::pow(10.0, -4.0 + i * (24.0 / 3600.0));
        double lv = log_radial(spec, r, k);
        if (std::isfinite(lv) && lv > best.logv) best = {r, lv};
    }
    // Past the maximum, step out until the integrand has dropped by e^-4; this
    // is where the quadrature switches to the tail map.
    best.split = best.r;
    for (double r = best.r; r < 1e24; r *= 1.05) {
        if (log_radial(spec, r, k) < best.logv - 4.0) break;
        best.split = r;
    }
    best.split = std::max(best.split, 1e-3);
    return best;
}

// log of int_0^inf r^k exp(-f(r^2)) dr.
double log_radial_integral(const PotentialSpec& spec, double k, double rel_tol) {
    Peak pk = radial_peak(spec, k);
    auto g = [&](double r) {
        double lv = log_radial(spec, r, k);
        return std::isfinite(lv) ? std::exp(lv - pk.logv) : 0.0;
    };
    double head = quad::integrate(g, 0.0, pk.split, rel_tol);
    double tail = quad::integrate_tail(g, pk.split, rel_tol);
    return pk.logv + std::log(head + tail);
}

// log of int_R^inf r^k exp(-f(r^2)) dr.
double log_radial_tail_integral(const PotentialSpec& spec, double k, double R, double rel_tol) {
    Peak pk = radial_peak(spec, k);
    double shift = pk.r > R ? pk.logv : log_radial(spec, R, k);
    auto g = [&](double r) {
        double lv = log_radial(spec, r, k);
        return std::isfinite(lv) ? std::exp(lv - shift) : 0.0;
    };
    double total = 0.0;
    double c = R;
    if (pk.split > R) {
        total += quad::integrate(g, R, pk.split, rel_tol);
        c = pk.split;
    }
    total += quad::integrate_tail(g, c, rel_tol);
    return shift + std::log(total);
}

void check_moment_order(const PotentialSpec& spec, double p) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw DomainError("moment order must be a finite p >= 0");
    if (spec.family == Family::GenCauchy && p >= spec.nu)
        throw MomentUndefined("moment of order " + std::to_string(p) + " is infinite for nu = " +
                              std::to_string(spec.nu));
}

// Monotone radial quantile table for families without a direct construction.
class RadialQuantile {
public:
    explicit RadialQuantile(const PotentialSpec& spec) {
        constexpr int kNodes = 4096;
        double rmax = choose_rmax(spec);
        double k = spec.d - 1.0;
        Peak pk = radial_peak(spec, k);
        auto g = [&](double r) {
            double lv = log_radial(spec, r, k);
            return std::isfinite(lv) ? std::exp(lv - pk.logv) : 0.0;
        };
        std::vector<double> r(kNodes), cdf(kNodes);
        double umax = std::log1p(rmax);
        r[0] = 0.0;
        cdf[0] = 0.0;
        for (int j = 1; j < kNodes; ++j) {
            r[j] = std::expm1(umax * j / (kNodes - 1));
            cdf[j] = cdf[j - 1] + quad::integrate(g, r[j - 1], r[j], 1e-10);
        }
        double total = cdf.back();
        if (!(total > 0.0) || !std::isfinite(total)) throw NumericError("radial quantile table: bad total mass");
        std::vector<double> xs, ys;
        xs.reserve(kNodes);
        ys.reserve(kNodes);
        for (int j = 0; j < kNodes; ++j) {
            double c = cdf[j] / total;
            if (!xs.empty() && c <= xs.back()) continue;
            xs.push_back(c);
            ys.push_back(r[j]);
        }
        if (xs.size() < 16) throw NumericError("radial quantile table: too few distinct nodes");
        lo_ = xs.front();
        hi_ = xs.back();
        interp_ = std::make_unique<Pchip>(std::move(xs), std::move(ys));
    }

    double operator()(double u) const { return (*interp_)(std::clamp(u, lo_, hi_)); }

private:
    using Pchip = boost::math::interpolators::pchip<std::vector<double>>;

    static double choose_rmax(const PotentialSpec& spec) {
        if (spec.family == Family::Sublinear) {
            // Smallest R with tail_bound(R) < 1e-12.
            double a = spec.alpha;
            double target = 2.0 * (0.5 + (spec.d / a) * std::log(2.0) + 12.0 * std::log(10.0));
            double s = std::pow(target, 2.0 / a) - 1.0;
            return std::sqrt(std::max(s, 1.0));
        }
        double R = 1.0;
        while (radial_tail(spec, R) > 1e-12) {
            R *= 2.0;
            if (R > 1e12) throw NumericError("radial quantile table: tail does not decay");
        }
        return R;
    }

    std::unique_ptr<Pchip> interp_;
    double lo_ = 0.0, hi_ = 1.0;
};

}  // namespace

PotentialSpec PotentialSpec::gen_cauchy(int d, double nu) {
    PotentialSpec s;
    s.family = Family::GenCauchy;
    s.d = d;
    s.nu = nu;
    s.alpha = 0.0;
    return s;
}

PotentialSpec PotentialSpec::sublinear(int d, double alpha) {
    PotentialSpec s;
    s.family = Family::Sublinear;
    s.d = d;
    s.alpha = alpha;
    return s;
}

PotentialSpec PotentialSpec::gaussian(int d) {
    PotentialSpec s;
    s.family = Family::Gaussian;
    s.d = d;
    s.alpha = 2.0;
    return s;
}

PotentialSpec PotentialSpec::radial_custom(int d, RadialProfile p) {
    PotentialSpec s;
    s.family = Family::RadialCustom;
    s.d = d;
    s.radial = std::move(p);
    return s;
}

void validate(const PotentialSpec& spec) {
    if (spec.d < 1) throw DomainError("d must be a positive integer");
    if (!(spec.lambda > 0.0) || !std::isfinite(spec.lambda)) throw DomainError("lambda must be positive");
    switch (spec.family) {
        case Family::GenCauchy:
            if (!(spec.nu > 0.0) || !std::isfinite(spec.nu)) throw DomainError("nu must be positive");
            break;
        case Family::Sublinear:
            if (!(spec.alpha > 0.0 && spec.alpha <= 2.0)) throw DomainError("alpha must lie in (0, 2]");
            break;
        case Family::Gaussian:
            break;
        case Family::RadialCustom:
            if (!spec.radial.f || !spec.radial.fprime) throw DomainError("radial_custom needs f and f'");
            break;
    }
}

std::string family_name(Family f) {
    switch (f) {
        case Family::GenCauchy: return "gen_cauchy";
        case Family::Sublinear: return "sublinear";
        case Family::Gaussian: return "gaussian";
        case Family::RadialCustom: return "radial_custom";
    }
    return "unknown";
}

Family family_from_name(const std::string& name) {
    if (name == "gen_cauchy") return Family::GenCauchy;
    if (name == "sublinear") return Family::Sublinear;
    if (name == "gaussian") return Family::Gaussian;
    if (name == "radial_custom") return Family::RadialCustom;
    throw DomainError("unknown family '" + name + "'");
}

double radial_f(const PotentialSpec& spec, double s) {
    switch (spec.family) {
        case Family::GenCauchy: return 0.5 * (spec.d + spec.nu) * std::log1p(s);
        case Family::Sublinear: return std::pow(1.0 + s, 0.5 * spec.alpha);
        case Family::Gaussian: return 0.5 * s;
        case Family::RadialCustom: return spec.radial.f(s);
    }
    return 0.0;
}

double radial_fprime(const PotentialSpec& spec, double s) {
    switch (spec.family) {
        case Family::GenCauchy: return 0.5 * (spec.d + spec.nu) / (1.0 + s);
        case Family::Sublinear: return 0.5 * spec.alpha * std::pow(1.0 + s, 0.5 * spec.alpha - 1.0);
        case Family::Gaussian: return 0.5;
        case Family::RadialCustom: return spec.radial.fprime(s);
    }
    return 0.0;
}

double potential_value(const PotentialSpec& spec, std::span<const double> x) {
    if (static_cast<int>(x.size()) != spec.d) throw DomainError("x has wrong dimension");
    if (!finite_vec(x)) throw DomainError("x must be finite");
    return radial_f(spec, norm2(x));
}

void potential_grad_into(const PotentialSpec& spec, const double* x, double* out) {
    double s = 0.0;
    for (int i = 0; i < spec.d; ++i) s += x[i] * x[i];
    double c = 2.0 * radial_fprime(spec, s);
    for (int i = 0; i < spec.d; ++i) out[i] = c * x[i];
}

std::vector<double> potential_grad(const PotentialSpec& spec, std::span<const double> x) {
    if (static_cast<int>(x.size()) != spec.d) throw DomainError("x has wrong dimension");
    if (!finite_vec(x)) throw DomainError("x must be finite");
    std::vector<double> g(spec.d);
    potential_grad_into(spec, x.data(), g.data());
    return g;
}

GrowthParams growth_params(const PotentialSpec& spec) {
    switch (spec.family) {
        case Family::GenCauchy: return {spec.d + spec.nu, 0.0};
        case Family::Sublinear: return {spec.alpha, spec.alpha};
        case Family::Gaussian: return {1.0, 2.0};
        case Family::RadialCustom:
            if (spec.growth) return *spec.growth;
            throw UnsupportedFamily("radial_custom requires caller-supplied growth parameters");
    }
    throw UnsupportedFamily("unknown family");
}

HolderConstants holder_constants(const PotentialSpec& spec) {
    switch (spec.family) {
        case Family::GenCauchy: return {spec.d + spec.nu, 1.0};
        case Family::Sublinear: return {1.0, 1.0};
        case Family::Gaussian: return {1.0, 1.0};
        case Family::RadialCustom: return {spec.holder_L, spec.holder_s};
    }
    return {1.0, 1.0};
}

MomentResult closed_form_moment(const PotentialSpec& spec, double p) {
    validate(spec);
    check_moment_order(spec, p);
    using std::lgamma;
    const double d = spec.d;
    switch (spec.family) {
        case Family::GenCauchy: {
            const double nu = spec.nu;
            double lv = std::log(d / (d + p)) + lgamma((nu - p) / 2) - lgamma(nu / 2) + lgamma((d + 2 + p) / 2) -
                        lgamma((d + 2) / 2);
            return {std::exp(lv), std::nullopt};
        }
        case Family::Sublinear: {
            const double a = spec.alpha;
            double lratio = lgamma((d + p) / a) - lgamma(d / a);
            double scale = std::pow(spec.lambda, -p / a);
            return {scale * std::exp(lratio), scale * std::exp(1.0 + lratio)};
        }
        case Family::Gaussian:
            return {std::exp(0.5 * p * std::log(2.0) + lgamma((d + p) / 2) - lgamma(d / 2)), std::nullopt};
        case Family::RadialCustom:
            throw UnsupportedFamily("no closed-form moment for radial_custom; use radial_moment");
    }
    throw UnsupportedFamily("unknown family");
}

double radial_moment(const PotentialSpec& spec, double p, double rel_tol) {
    validate(spec);
    check_moment_order(spec, p);
    double k = spec.d - 1.0;
    return std::exp(log_radial_integral(spec, k + p, rel_tol) - log_radial_integral(spec, k, rel_tol));
}

double tail_bound(const PotentialSpec& spec, double R) {
    validate(spec);
    if (!(R >= 0.0)) throw DomainError("R must be non-negative");
    switch (spec.family) {
        case Family::GenCauchy: return std::pow(spec.nu + spec.d, spec.nu / 2) * std::pow(R, -spec.nu);
        case Family::Sublinear:
            return std::exp(0.5 + (spec.d / spec.alpha) * std::log(2.0) -
                            0.5 * std::pow(1.0 + R * R, spec.alpha / 2));
        case Family::Gaussian:
        case Family::RadialCustom: break;
    }
    throw UnsupportedFamily("no tail bound implemented for " + family_name(spec.family));
}

double radial_tail(const PotentialSpec& spec, double R) {
    validate(spec);
    if (!(R >= 0.0)) throw DomainError("R must be non-negative");
    if (R == 0.0) return 1.0;
    double k = spec.d - 1.0;
    return std::exp(log_radial_tail_integral(spec, k, R, 1e-12) - log_radial_integral(spec, k, 1e-12));
}

double sphere_area(int d) { return 2.0 * std::pow(kPi, d / 2.0) / std::tgamma(d / 2.0); }

double log_normalizing_constant(const PotentialSpec& spec) {
    validate(spec);
    const double d = spec.d;
    switch (spec.family) {
        case Family::GenCauchy:
            return std::lgamma(spec.nu / 2) + 0.5 * d * std::log(kPi) - std::lgamma((spec.nu + d) / 2);
        case Family::Gaussian: return 0.5 * d * std::log(2.0 * kPi);
        case Family::Sublinear:
        case Family::RadialCustom: break;
    }
    return std::log(sphere_area(spec.d)) + log_radial_integral(spec, d - 1.0, 1e-12);
}

double normalizing_constant(const PotentialSpec& spec) { return std::exp(log_normalizing_constant(spec)); }

double density_at_radius(const PotentialSpec& spec, double r) {
    return std::exp(-radial_f(spec, r * r) - log_normalizing_constant(spec));
}

std::vector<double> direct_sampler(const PotentialSpec& spec, std::size_t n, std::uint64_t seed) {
    validate(spec);
    const int d = spec.d;
    std::vector<double> out(n * d);
    std::vector<double> z(d);
    std::unique_ptr<RadialQuantile> table;
    if (spec.family == Family::Sublinear || spec.family == Family::RadialCustom)
        table = std::make_unique<RadialQuantile>(spec);
    for (std::size_t i = 0; i < n; ++i) {
        rng::Stream st{rng::stream_key(seed, i)};
        double* x = out.data() + i * d;
        st.normals(z.data(), d);
        switch (spec.family) {
            case Family::Gaussian:
                std::copy(z.begin(), z.end(), x);
                break;
            case Family::GenCauchy: {
                double chi2 = 2.0 * boost::math::gamma_p_inv(spec.nu / 2, st.uniform());
                double s = 1.0 / std::sqrt(chi2);
                for (int j = 0; j < d; ++j) x[j] = z[j] * s;
                break;
            }
            case Family::Sublinear:
            case Family::RadialCustom: {
                double r = (*table)(st.uniform());
                double zn = std::sqrt(norm2(z));
                for (int j = 0; j < d; ++j) x[j] = r * z[j] / zn;
                break;
            }
        }
    }
    return out;
}

nlohmann::json to_json(const PotentialSpec& spec) {
    nlohmann::json j;
    j["family"] = family_name(spec.family);
    j["d"] = spec.d;
    if (spec.family == Family::GenCauchy) j["nu"] = spec.nu;
    if (spec.family == Family::Sublinear) j["alpha"] = spec.alpha;
    if (spec.lambda != 1.0) j["lambda"] = spec.lambda;
    return j;
}

PotentialSpec spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DomainError("potential spec must be a JSON object");
    if (!j.contains("family") || !j["family"].is_string()) throw DomainError("field 'family': required string");
    if (!j.contains("d") || !j["d"].is_number_integer()) throw DomainError("field 'd': required integer");
    Family fam = family_from_name(j["family"].get<std::string>());
    int d = j["d"].get<int>();
    PotentialSpec s;
    switch (fam) {
        case Family::GenCauchy:
            if (!j.contains("nu") || !j["nu"].is_number()) throw DomainError("field 'nu': required number");
            s = PotentialSpec::gen_cauchy(d, j["nu"].get<double>());
            break;
        case Family::Sublinear:
            if (!j.contains("alpha") || !j["alpha"].is_number())
                throw DomainError("field 'alpha': required number");
            s = PotentialSpec::sublinear(d, j["alpha"].get<double>());
            break;
        case Family::Gaussian: s = PotentialSpec::gaussian(d); break;
        case Family::RadialCustom: throw UnsupportedFamily("radial_custom cannot be read from JSON");
    }
    if (j.contains("lambda")) {
        if (!j["lambda"].is_number()) throw DomainError("field 'lambda': must be a number");
        s.lambda = j["lambda"].get<double>();
    }
    validate(s);
    return s;
}

namespace {

void random_point(rng::Stream& st, int d, double max_norm, double* x) {
    st.normals(x, d);
    double n = 0.0;
    for (int i = 0; i < d; ++i) n += x[i] * x[i];
    n = std::sqrt(n);
    // Radius log-uniform on [1e-3, max_norm] so both the core and the tail are hit.
    double r = std::exp(std::log(1e-3) + st.uniform() * (std::log(max_norm) - std::log(1e-3)));
    for (int i = 0; i < d; ++i) x[i] *= r / n;
}

}  // namespace

PropertyCheck check_growth_condition(const PotentialSpec& spec, std::size_t n_points, double max_norm,
                                     std::uint64_t seed) {
    GrowthParams gp = growth_params(spec);
    PropertyCheck out;
    std::vector<double> x(spec.d), g(spec.d);
    rng::Stream st{rng::stream_key(seed, 0)};
    for (std::size_t i = 0; i < n_points; ++i) {
        random_point(st, spec.d, max_norm, x.data());
        potential_grad_into(spec, x.data(), g.data());
        double r2 = norm2(x);
        double lhs = std::sqrt(norm2(g));
        double rhs = gp.b * std::sqrt(r2) / std::pow(1.0 + r2, 1.0 - gp.alpha_growth / 2);
        double ratio = lhs / rhs;
        out.worst_ratio = std::max(out.worst_ratio, ratio);
        if (ratio > 1.0 + 1e-12) ++out.violations;
        ++out.checked;
    }
    return out;
}

PropertyCheck check_holder(const PotentialSpec& spec, std::size_t n_pairs, double max_norm, std::uint64_t seed) {
    HolderConstants hc = holder_constants(spec);
    PropertyCheck out;
    int d = spec.d;
    std::vector<double> x(d), y(d), gx(d), gy(d), diff(d);
    rng::Stream st{rng::stream_key(seed, 1)};
    for (std::size_t i = 0; i < n_pairs; ++i) {
        random_point(st, d, max_norm, x.data());
        random_point(st, d, max_norm, y.data());
        potential_grad_into(spec, x.data(), gx.data());
        potential_grad_into(spec, y.data(), gy.data());
        double dg = 0.0, dx = 0.0;
        for (int j = 0; j < d; ++j) {
            dg += (gx[j] - gy[j]) * (gx[j] - gy[j]);
            dx += (x[j] - y[j]) * (x[j] - y[j]);
        }
        if (dx == 0.0) continue;
        double ratio = std::sqrt(dg) / (hc.L * std::pow(std::sqrt(dx), hc.s));
        out.worst_ratio = std::max(out.worst_ratio, ratio);
        if (ratio > 1.0 + 1e-12) ++out.violations;
        ++out.checked;
    }
    return out;
}

}  // namespace heavytail
