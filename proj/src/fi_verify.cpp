#include "heavytail/fi_verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "heavytail/errors.hpp"
#include "heavytail/parallel.hpp"

namespace heavytail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& msg) {
    if (!ok) throw DomainError(msg);
}

// Tanh-sinh with the error judged against the L1 norm, so integrands that
// cancel to zero do not fail. Infinite limits are allowed.
double integrate_l1(const std::function<double(double)>& g, double a, double b, double abs_floor = 1e-14) {
    thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
    double err = 0.0, l1 = 0.0;
    double v = ts.integrate(g, a, b, 1e-11, &err, &l1);
    if (!(err <= 1e-8 * l1 + abs_floor) || !std::isfinite(v))
        throw NumericError("quadrature did not converge (err " + std::to_string(err) + ", L1 " + std::to_string(l1) +
                               ") on [" + std::to_string(a) + ", " + std::to_string(b) + "]",
                           l1 > 0 ? err / l1 : err);
    return v;
}

// E_pi[g] for a d = 1 target, split at the given points.
struct PiExpect {
    const PotentialSpec& spec;
    double log_Z;

    double density(double x) const { return std::exp(-radial_f(spec, x * x) - log_Z); }

    double operator()(const std::function<double(double)>& g, double lo, double hi, std::vector<double> pts) const {
        auto h = [&](double x) {
            double gv = g(x);
            return gv == 0.0 ? 0.0 : gv * density(x);
        };
        if (std::isinf(lo) || std::isinf(hi)) {
            pts.push_back(-1.0);
            pts.push_back(0.0);
            pts.push_back(1.0);
        }
        std::vector<double> cuts;
        if (!std::isinf(lo)) cuts.push_back(lo);
        for (double p : pts)
            if (p > lo && p < hi) cuts.push_back(p);
        if (!std::isinf(hi)) cuts.push_back(hi);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) s += integrate_l1(h, cuts[i], cuts[i + 1]);
        if (std::isinf(lo)) s += integrate_l1(h, -kInf, cuts.front());
        if (std::isinf(hi)) s += integrate_l1(h, cuts.back(), kInf);
        return s;
    }
};

PiExpect expect_for(const PotentialSpec& spec) {
    validate(spec);
    require(spec.d == 1, "functional-inequality checks need d = 1");
    return {spec, log_normalizing_constant(spec)};
}

// f(x) = ((x - c)/w)^k * phi((x - c)/w), phi(u) = exp(1 - 1/(1 - u^2)) on |u| < 1.
TestFunction bump_poly(int k, double c, double w) {
    auto phi = [](double u) { return std::abs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0; };
    TestFunction t;
    t.name = "bump_deg" + std::to_string(k) + "_c" + std::to_string(c).substr(0, 5) + "_w" + std::to_string(w).substr(0, 4);
    t.f = [=](double x) {
        double u = (x - c) / w;
        return std::pow(u, k) * phi(u);
    };
    t.fp = [=](double x) {
        double u = (x - c) / w;
        if (std::abs(u) >= 1.0) return 0.0;
        double one = 1.0 - u * u;
        double dphi = phi(u) * (-2.0 * u / (one * one));
        double pk = std::pow(u, k);
        double dpk = k == 0 ? 0.0 : k * std::pow(u, k - 1);
        return (dpk * phi(u) + pk * dphi) / w;
    };
    t.lo = c - w;
    t.hi = c + w;
    t.breaks = {c - 0.5 * w, c, c + 0.5 * w};
    double mx = 0.0, mn = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        double v = t.f(t.lo + (t.hi - t.lo) * i / 20000.0);
        mx = std::max(mx, v);
        mn = std::min(mn, v);
    }
    t.osc = mx - mn;
    return t;
}

TestFunction ramp(double c, double s) {
    TestFunction t;
    t.name = "tanh_c" + std::to_string(c).substr(0, 5) + "_s" + std::to_string(s).substr(0, 4);
    t.f = [=](double x) { return std::tanh((x - c) / s); };
    t.fp = [=](double x) {
        double ch = std::cosh((x - c) / s);
        return std::isfinite(ch) ? 1.0 / (s * ch * ch) : 0.0;
    };
    t.breaks = {c - 20 * s, c - 2 * s, c, c + 2 * s, c + 20 * s};
    t.osc = 2.0;
    return t;
}

struct Moments {
    double var = 0.0;   // Var_pi(f)
    double grad = 0.0;  // E_pi f'^2
};

Moments moments(const PiExpect& E, const TestFunction& t) {
    const double mean = E(t.f, t.lo, t.hi, t.breaks);
    // Outside a compact support f - mean = -mean, which contributes mean^2 (1 - pi(support)).
    double var;
    if (std::isinf(t.lo)) {
        var = E([&](double x) { return (t.f(x) - mean) * (t.f(x) - mean); }, t.lo, t.hi, t.breaks);
    } else {
        double in = E([&](double x) { return (t.f(x) - mean) * (t.f(x) - mean); }, t.lo, t.hi, t.breaks);
        double mass_in = E([](double) { return 1.0; }, t.lo, t.hi, t.breaks);
        var = in + mean * mean * std::max(0.0, 1.0 - mass_in);
    }
    const double grad = E([&](double x) { return t.fp(x) * t.fp(x); }, t.lo, t.hi, t.breaks);
    return {std::max(var, 0.0), grad};
}

void finish(CheckReport& rep) {
    rep.n_violations = 0;
    rep.max_violation = 0.0;
    for (const auto& e : rep.entries) {
        if (e.margin < 0.0) {
            ++rep.n_violations;
            rep.max_violation = std::max(rep.max_violation, -e.margin);
        }
    }
}

}  // namespace

double DensityGrid::mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m += values[i] * widths[i];
    return m;
}

double DensityGrid::second_moment() const {
    // Exact for the piecewise-constant density.
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
        m += values[i] * widths[i] * (nodes[i] * nodes[i] + widths[i] * widths[i] / 12.0);
    return m;
}

void DensityGrid::validate() const {
    require(nodes.size() == widths.size() && nodes.size() == values.size(), "grid arrays differ in length");
    for (std::size_t i = 0; i < size(); ++i) {
        require(widths[i] > 0.0, "grid widths must be positive");
        require(values[i] >= 0.0, "grid values must be non-negative");
    }
    require(std::abs(mass() - 1.0) <= 1e-8, "grid mass differs from 1 by more than 1e-8");
}

DensityGrid sinh_grid(double half_width, double scale, std::size_t n_cells) {
    require(half_width > 0.0 && scale > 0.0 && n_cells >= 2, "sinh_grid needs positive sizes and >= 2 cells");
    const double xi_max = std::asinh(half_width / scale);
    std::vector<double> faces(n_cells + 1);
    for (std::size_t i = 0; i <= n_cells; ++i)
        faces[i] = scale * std::sinh(-xi_max + 2.0 * xi_max * static_cast<double>(i) / n_cells);
    faces.front() = -half_width;
    faces.back() = half_width;
    DensityGrid g;
    for (std::size_t i = 0; i < n_cells; ++i) {
        g.nodes.push_back(0.5 * (faces[i] + faces[i + 1]));
        g.widths.push_back(faces[i + 1] - faces[i]);
    }
    g.values.assign(n_cells, 0.0);
    return g;
}

DensityGrid discretize(const DensityGrid& grid, const std::function<double(double)>& density) {
    DensityGrid out = grid;
    double total = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double a = grid.nodes[i] - 0.5 * grid.widths[i], b = grid.nodes[i] + 0.5 * grid.widths[i];
        double m = integrate_l1(density, a, b, 1e-250);
        require(m >= 0.0, "density must be non-negative");
        out.values[i] = m / grid.widths[i];
        total += m;
    }
    require(total > 0.0, "density has no mass on the grid");
    for (double& v : out.values) v /= total;
    return out;
}

DensityGrid pi_grid(const PotentialSpec& spec, const DensityGrid& grid) {
    auto E = expect_for(spec);
    return discretize(grid, [&](double x) { return E.density(x); });
}

TestFunctionSet default_test_functions() {
    TestFunctionSet s;
    TestFunction one;
    one.name = "constant";
    one.f = [](double) { return 1.0; };
    one.fp = [](double) { return 0.0; };
    one.osc = 0.0;
    s.functions.push_back(one);

    const std::pair<double, double> bumps[] = {{0.0, 1.0}, {0.0, 3.0}, {2.0, 1.5}, {-5.0, 2.0}, {10.0, 5.0}};
    for (auto [c, w] : bumps)
        for (int k : {0, 1, 2, 3, 6}) s.functions.push_back(bump_poly(k, c, w));
    const std::pair<double, double> ramps[] = {{0.0, 1.0}, {0.0, 0.2}, {3.0, 1.0}, {-8.0, 2.0}, {20.0, 4.0}, {50.0, 10.0}};
    for (auto [c, sc] : ramps) s.functions.push_back(ramp(c, sc));
    return s;
}

double max_derivative_error(const TestFunctionSet& fset) {
    double worst = 0.0;
    for (const auto& t : fset.functions) {
        double lo = std::isinf(t.lo) ? -60.0 : t.lo, hi = std::isinf(t.hi) ? 60.0 : t.hi;
        for (int i = 1; i < 200; ++i) {
            double x = lo + (hi - lo) * i / 200.0;
            const double h = 1e-5 * std::max(1.0, (hi - lo) / 10.0);
            double fd = (t.f(x + h) - t.f(x - h)) / (2 * h);
            worst = std::max(worst, std::abs(fd - t.fp(x)));
        }
    }
    return worst;
}

std::vector<double> default_r_grid() {
    std::vector<double> r;
    for (int i = 0; i < 10; ++i) r.push_back(std::pow(10.0, -3.0 + i / 3.0));
    return r;
}

nlohmann::json to_json(const CheckReport& r) {
    nlohmann::json j;
    j["suite"] = r.suite;
    j["target"] = r.target;
    j["falsify"] = r.falsify;
    j["constant"] = r.constant;
    j["n_checked"] = r.entries.size();
    j["n_violations"] = r.n_violations;
    j["max_violation"] = r.max_violation;
    j["passed"] = r.passed();
    j["note"] = "a finite test set can only falsify the inequality, never prove it";
    nlohmann::json es = nlohmann::json::array();
    for (const auto& e : r.entries)
        es.push_back({{"f", e.function}, {"r", e.r}, {"lhs", e.lhs}, {"rhs", e.rhs}, {"margin", e.margin}});
    j["entries"] = es;
    return j;
}

CheckReport wpi_check(const PotentialSpec& spec, const WeightFn& beta, const TestFunctionSet& fset,
                      const std::vector<double>& r_grid, bool falsify) {
    auto E = expect_for(spec);
    require(!r_grid.empty(), "r grid is empty");
    std::vector<Moments> mom(fset.functions.size());
    parallel_for(mom.size(), [&](std::size_t i) { mom[i] = moments(E, fset.functions[i]); });
    const double scale = falsify ? 1.0 / kFalsifyFactor : 1.0;
    CheckReport rep;
    rep.suite = "wpi";
    rep.target = family_name(spec.family);
    rep.falsify = falsify;
    rep.constant = scale;
    for (std::size_t i = 0; i < mom.size(); ++i) {
        const auto& t = fset.functions[i];
        for (double r : r_grid) {
            require(r > 0.0, "r must be positive");
            double rhs = scale * beta(r) * mom[i].grad + r * t.osc * t.osc;
            rep.entries.push_back({t.name, r, mom[i].var, rhs, rhs + kCheckSlack - mom[i].var});
        }
    }
    finish(rep);
    return rep;
}

double converse_constant(int d, double nu) {
    require(d >= 1 && nu > 0.0, "d >= 1 and nu > 0 required");
    return nu >= d + 2.0 ? 1.0 / (d + nu) : 2.0 / nu;
}

CheckReport converse_pi_check(const PotentialSpec& spec, const TestFunctionSet& fset, bool falsify) {
    if (spec.family != Family::GenCauchy) throw UnsupportedFamily("converse inequality is for gen_cauchy");
    auto E = expect_for(spec);
    const double C = converse_constant(spec.d, spec.nu) / (falsify ? kFalsifyFactor : 1.0);
    auto w = [](double x) { return 1.0 / (1.0 + x * x); };
    const double Ew = E(w, -kInf, kInf, {});
    CheckReport rep;
    rep.suite = "converse";
    rep.target = family_name(spec.family);
    rep.falsify = falsify;
    rep.constant = C;
    rep.entries.resize(fset.functions.size());
    parallel_for(fset.functions.size(), [&](std::size_t i) {
        const auto& t = fset.functions[i];
        // The minimising c is the w-weighted mean; f = 0 off a compact support.
        const double Efw = E([&](double x) { return t.f(x) * w(x); }, t.lo, t.hi, t.breaks);
        const double c = Efw / Ew;
        double lhs;
        if (std::isinf(t.lo)) {
            lhs = E([&](double x) { return (t.f(x) - c) * (t.f(x) - c) * w(x); }, t.lo, t.hi, t.breaks);
        } else {
            double in = E([&](double x) { return ((t.f(x) - c) * (t.f(x) - c) - c * c) * w(x); }, t.lo, t.hi, t.breaks);
            lhs = in + c * c * Ew;
        }
        lhs = std::max(lhs, 0.0);
        const double rhs = C * E([&](double x) { return t.fp(x) * t.fp(x); }, t.lo, t.hi, t.breaks);
        rep.entries[i] = {t.name, 0.0, lhs, rhs, rhs + kCheckSlack - lhs};
    });
    finish(rep);
    return rep;
}

double weighted_constant(int d, double alpha) {
    require(d >= 1 && alpha > 0.0, "d >= 1 and alpha > 0 required");
    return 12.0 * d / std::pow(alpha, 3) + (d + alpha) / std::pow(alpha, 4);
}

CheckReport weighted_pi_check(const PotentialSpec& spec, const TestFunctionSet& fset, bool falsify) {
    if (spec.family != Family::Sublinear) throw UnsupportedFamily("weighted inequality is for sublinear");
    require(spec.alpha > 0.0 && spec.alpha < 1.0, "alpha must lie in (0, 1)");
    auto E = expect_for(spec);
    const double a = spec.alpha;
    const double C = std::numbers::e * weighted_constant(spec.d, a) / (falsify ? kFalsifyFactor : 1.0);
    std::vector<Moments> mom(fset.functions.size());
    std::vector<double> wgrad(fset.functions.size());
    parallel_for(mom.size(), [&](std::size_t i) {
        const auto& t = fset.functions[i];
        mom[i] = moments(E, t);
        wgrad[i] = E([&](double x) { return std::pow(std::abs(x), 2.0 - 2.0 * a) * t.fp(x) * t.fp(x); }, t.lo, t.hi,
                     t.breaks);
    });
    CheckReport rep;
    rep.suite = "weighted";
    rep.target = family_name(spec.family);
    rep.falsify = falsify;
    rep.constant = C;
    for (std::size_t i = 0; i < mom.size(); ++i) {
        double rhs = C * wgrad[i];
        rep.entries.push_back({fset.functions[i].name, 0.0, mom[i].var, rhs, rhs + kCheckSlack - mom[i].var});
    }
    finish(rep);
    return rep;
}

namespace {

// Face conductances sqrt(pi_i pi_{i+1}) / (x_{i+1} - x_i).
std::vector<double> face_rates(const DensityGrid& pi) {
    std::vector<double> k(pi.size() - 1);
    for (std::size_t i = 0; i + 1 < pi.size(); ++i)
        k[i] = std::sqrt(pi.values[i] * pi.values[i + 1]) / (pi.nodes[i + 1] - pi.nodes[i]);
    return k;
}

double stable_dt(const DensityGrid& pi, const std::vector<double>& k) {
    double dt = kInf;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        double out = (i > 0 ? k[i - 1] : 0.0) + (i + 1 < pi.size() ? k[i] : 0.0);
        if (out > 0.0) dt = std::min(dt, pi.widths[i] * pi.values[i] / out);
    }
    return dt;
}

double half_width(const DensityGrid& g) { return g.nodes.back() + 0.5 * g.widths.back(); }

}  // namespace

DensityGrid fp_layout(const PotentialSpec& spec, double sigma0_2, std::size_t n_cells) {
    require(sigma0_2 > 0.0, "sigma0_2 must be positive");
    double X = 1.0;
    while (radial_tail(spec, X) > 2e-11) X *= 1.25;
    X = std::max(X, 7.5 * std::sqrt(sigma0_2));
    return sinh_grid(X, 1.0, n_cells);
}

DensityGrid gaussian_on(const DensityGrid& grid, double sigma2) {
    require(sigma2 > 0.0, "sigma2 must be positive");
    return discretize(grid, [sigma2](double x) {
        return std::exp(-0.5 * x * x / sigma2) / std::sqrt(2.0 * std::numbers::pi * sigma2);
    });
}

double max_stable_dt(const PotentialSpec& spec, const DensityGrid& grid) {
    auto pi = pi_grid(spec, grid);
    return stable_dt(pi, face_rates(pi));
}

std::vector<FPFrame> fokker_planck_evolve_1d(const PotentialSpec& spec, const DensityGrid& rho0, double t_final,
                                             double dt, double record_dt) {
    rho0.validate();
    require(rho0.size() >= 3, "grid needs >= 3 cells");
    require(t_final > 0.0 && dt > 0.0, "t_final and dt must be positive");
    require(radial_tail(spec, std::min(0.5 * rho0.widths.front() - rho0.nodes.front(), half_width(rho0))) < 1e-10,
            "grid truncates more than 1e-10 of pi");
    const std::size_t n = rho0.size();
    const double end_mass = rho0.values.front() * rho0.widths.front() + rho0.values.back() * rho0.widths.back();
    require(end_mass < 1e-10, "rho0 has mass >= 1e-10 in the end cells");
    const DensityGrid pi = pi_grid(spec, rho0);
    for (double v : pi.values) require(v > 1e-300, "pi underflows on the grid; shrink it");
    const auto k = face_rates(pi);
    const double dt_max = stable_dt(pi, k);
    if (dt > dt_max)
        throw DomainError("dt = " + std::to_string(dt) + " exceeds the stability limit; use dt <= " +
                          std::to_string(dt_max));

    const auto steps = static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
    const double h = t_final / steps;
    if (record_dt <= 0.0) record_dt = t_final / 100.0;
    const auto every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(record_dt / h)));

    std::vector<FPFrame> frames{{0.0, rho0}};
    std::vector<double> rho = rho0.values, u(n), J(n - 1);
    DensityGrid cur = rho0;
    for (std::size_t s = 1; s <= steps; ++s) {
        for (std::size_t i = 0; i < n; ++i) u[i] = rho[i] / pi.values[i];
        for (std::size_t i = 0; i + 1 < n; ++i) J[i] = k[i] * (u[i] - u[i + 1]);
        for (std::size_t i = 0; i < n; ++i) {
            double in = (i > 0 ? J[i - 1] : 0.0) - (i + 1 < n ? J[i] : 0.0);
            rho[i] += h * in / pi.widths[i];
        }
        if (s % every == 0 || s == steps) {
            cur.values = rho;
            frames.push_back({h * s, cur});
        }
    }
    return frames;
}

GridRenyi fq_gq(const DensityGrid& rho, const DensityGrid& pi, double q) {
    require(q > 1.0, "q must exceed 1");
    require(rho.size() == pi.size(), "rho and pi grids differ");
    GridRenyi out;
    double F = 0.0;
    std::vector<double> v(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (pi.values[i] < 1e-300) {
            if (rho.values[i] > 0.0) out.support_violation = true;
            continue;
        }
        double u = rho.values[i] / pi.values[i];
        F += pi.widths[i] * pi.values[i] * std::pow(u, q);
        v[i] = std::pow(u, q / 2.0);
    }
    if (out.support_violation) {
        out.R = kInf;
        out.F = kInf;
        out.G = kInf;
        return out;
    }
    double G = 0.0;
    for (std::size_t i = 0; i + 1 < rho.size(); ++i) {
        double dv = v[i + 1] - v[i];
        G += std::sqrt(pi.values[i] * pi.values[i + 1]) / (pi.nodes[i + 1] - pi.nodes[i]) * dv * dv;
    }
    out.F = F;
    out.G = 4.0 / (q * q) * G;
    out.R = std::log(F) / (q - 1.0);
    return out;
}

GridRenyi fq_gq(const DensityGrid& rho, const PotentialSpec& spec, double q) {
    return fq_gq(rho, pi_grid(spec, rho), q);
}

double renyi_quadrature(const DensityGrid& rho, const PotentialSpec& spec, double q) { return fq_gq(rho, spec, q).R; }

double renyi_variance_gap(const DensityGrid& rho, const DensityGrid& pi, double q) {
    auto r = fq_gq(rho, pi, q);
    double mean = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i)
        mean += pi.widths[i] * pi.values[i] * std::pow(rho.values[i] / pi.values[i], q / 2.0);
    const double var = r.F - mean * mean;
    return var - r.F * (1.0 - std::exp(-r.R));
}

double grid_log_ratio_sup(const DensityGrid& rho, const DensityGrid& pi) {
    double m = -kInf;
    for (std::size_t i = 0; i < rho.size(); ++i)
        if (rho.values[i] > 0.0) m = std::max(m, std::log(rho.values[i] / pi.values[i]));
    return m;
}

std::vector<TrajectoryRow> trajectory_table(const std::vector<FPFrame>& frames, const DensityGrid& pi, double q) {
    std::vector<TrajectoryRow> rows(frames.size());
    parallel_for(frames.size(), [&](std::size_t i) {
        auto r = fq_gq(frames[i].rho, pi, q);
        rows[i] = {frames[i].t, r.R, r.F, r.G, frames[i].rho.mass(), frames[i].rho.second_moment()};
    });
    return rows;
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& rows) {
    os << "t,R_q,F_q,G_q,mass,m2\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.10g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.R, r.F, r.G, r.mass, r.m2);
        os << buf;
    }
}

nlohmann::json to_json(const FPCheckReport& r) {
    nlohmann::json j;
    j["suite"] = "fp";
    j["max_mass_error"] = r.max_mass_error;
    j["max_increase"] = r.max_increase;
    j["max_derivative_rel_error"] = r.max_derivative_rel_error;
    j["n_derivative_points"] = r.n_derivative_points;
    j["min_variance_gap"] = r.min_variance_gap;
    j["R_inf0"] = r.R_inf0;
    nlohmann::json hits = nlohmann::json::array();
    for (const auto& h : r.hits)
        hits.push_back({{"eps", h.eps},
                        {"time", std::isfinite(h.time) ? nlohmann::json(h.time) : nlohmann::json(nullptr)},
                        {"bound", h.bound}});
    j["hits"] = hits;
    j["violations"] = r.violations;
    j["passed"] = r.passed();
    return j;
}

FPCheckReport fp_check(const PotentialSpec& spec, const FPCheckOptions& opt) {
    validate(spec);
    require(spec.d == 1, "fp check needs d = 1");
    require(opt.sigma0_2 > 0.0 && opt.q >= 2.0, "sigma0_2 > 0 and q >= 2 required");

    auto layout = fp_layout(spec, opt.sigma0_2, opt.n_cells);
    auto rho0 = gaussian_on(layout, opt.sigma0_2);
    const DensityGrid pi = pi_grid(spec, layout);
    const double dt = 0.9 * stable_dt(pi, face_rates(pi));
    auto frames = fokker_planck_evolve_1d(spec, rho0, opt.t_final, dt, opt.record_dt);

    FPCheckReport rep;
    rep.rows = trajectory_table(frames, pi, opt.q);
    rep.R_inf0 = grid_log_ratio_sup(rho0, pi);
    const auto& rows = rep.rows;
    rep.min_variance_gap = kInf;
    std::vector<double> gaps(frames.size());
    parallel_for(frames.size(), [&](std::size_t i) { gaps[i] = renyi_variance_gap(frames[i].rho, pi, opt.q); });
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rep.max_mass_error = std::max(rep.max_mass_error, std::abs(rows[i].mass - 1.0));
        if (i > 0) rep.max_increase = std::max(rep.max_increase, rows[i].R - rows[i - 1].R);
        rep.min_variance_gap = std::min(rep.min_variance_gap, gaps[i] / std::max(1.0, rows[i].F));
    }
    for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
        const double fd = (rows[i + 1].R - rows[i - 1].R) / (rows[i + 1].t - rows[i - 1].t);
        if (std::abs(fd) <= 1e-4) continue;
        const double exact = -opt.q * rows[i].G / rows[i].F;
        rep.max_derivative_rel_error = std::max(rep.max_derivative_rel_error, std::abs(fd - exact) / std::abs(exact));
        ++rep.n_derivative_points;
    }

    BoundQuery query;
    query.spec = spec;
    query.q = opt.q;
    query.R_init[kRq0] = rows.front().R;
    query.R_init[kRinf0] = rep.R_inf0;
    const auto beta = family_beta(spec);
    for (double eps : opt.eps) {
        query.eps = eps;
        double bound = diffusion_time_bound(query, beta).value / (opt.falsify ? kFalsifyFactor : 1.0);
        double hit = kInf;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].R <= eps) {
                if (i == 0) {
                    hit = 0.0;
                } else {
                    double f = (rows[i - 1].R - eps) / (rows[i - 1].R - rows[i].R);
                    hit = rows[i - 1].t + f * (rows[i].t - rows[i - 1].t);
                }
                break;
            }
        }
        rep.hits.push_back({eps, hit, bound});
        if (!(hit <= bound)) {
            rep.violations.push_back("time to R_q <= " + std::to_string(eps) +
                                     (std::isinf(hit) ? " not reached" : " = " + std::to_string(hit)) +
                                     " exceeds bound " + std::to_string(bound));
        }
    }
    if (rep.max_mass_error > 1e-8) rep.violations.push_back("mass drift " + std::to_string(rep.max_mass_error));
    if (rep.max_increase > 1e-6) rep.violations.push_back("R_q increased by " + std::to_string(rep.max_increase));
    if (rep.max_derivative_rel_error > 0.05)
        rep.violations.push_back("dR_q/dt off by " + std::to_string(100 * rep.max_derivative_rel_error) + "%");
    if (rep.min_variance_gap < -1e-9) rep.violations.push_back("variance gap negative");
    return rep;
}

}  // namespace heavytail
