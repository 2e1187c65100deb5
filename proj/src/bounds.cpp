#include "heavytail/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "heavytail/diagnostics.hpp"
#include "heavytail/errors.hpp"

namespace heavytail {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& msg) {
    if (!ok) throw DomainError(msg);
}

void flag(BoundReport& r, const std::string& why) {
    r.infeasible = true;
    if (!r.infeasible_reason.empty()) r.infeasible_reason += "; ";
    r.infeasible_reason += why;
}

double log_sum_exp(const std::vector<double>& xs) {
    double mx = -kInf;
    for (double x : xs) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - mx);
    return mx + std::log(s);
}

// ln of the sublinear weighting at a fixed gamma; +inf when the prefactor
// bracket is not positive.
double log_beta_sublinear(double alpha, int d, double r, double gamma, SublinearBeta& parts) {
    const double C = 12.0 * d / std::pow(alpha, 3) + (d + alpha) / std::pow(alpha, 4);
    const double denom = 2.0 * (1.0 - alpha) + gamma;
    const double log_a = std::log(gamma) + (2.0 / gamma) * std::log(kE * C) - std::log(denom);
    const double b = 2.0 * (1.0 - alpha) / denom;
    const double kappa = 1.0 - alpha + gamma / 2.0;
    parts = {kInf, gamma, std::exp(log_a), b, C};

    const double t = kappa * std::sqrt(b) * std::exp(-0.5 * (alpha - gamma / 2.0) * log_a);
    if (!(t < 1.0)) return kInf;
    const double k = (2.0 - 2.0 * alpha + gamma) / alpha;
    const double log3 = std::max(0.0, (2.0 - 3.0 * alpha + gamma) / alpha * std::log(3.0));
    std::vector<double> terms{
        2.0 * (2.0 - 2.0 * alpha + gamma) / gamma * std::log(kE * C),
        0.0,
        k * (std::log(2.0 * std::log(2.0) / alpha) + std::log(static_cast<double>(d))),
    };
    const double lr = std::log(1.0 / r);
    if (lr > 0.0) terms.push_back(k * (std::log(2.0) + std::log(lr)));
    return -2.0 * std::log1p(-t) + log3 + log_sum_exp(terms);
}

std::optional<Regime> spec_regime(const PotentialSpec& spec) {
    if (spec.family == Family::RadialCustom && !spec.growth) return std::nullopt;
    return regime_of(growth_params(spec));
}

bool is_poincare(const PotentialSpec& spec) { return spec.family == Family::Gaussian; }

}  // namespace

std::string kind_name(BoundKind k) {
    switch (k) {
        case BoundKind::time_T: return "time_T";
        case BoundKind::iters_N: return "iters_N";
        case BoundKind::beta: return "beta";
        case BoundKind::h_max: return "h_max";
        case BoundKind::h_disc: return "h_disc";
        case BoundKind::delta0_min: return "delta0_min";
        case BoundKind::init_div: return "init_div";
    }
    return "unknown";
}

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::alpha0: return "alpha0";
        case Regime::alpha_mid: return "alpha_mid";
        case Regime::alpha2: return "alpha2";
    }
    return "unknown";
}

Regime regime_of(const GrowthParams& g) {
    require(g.alpha_growth >= 0.0 && g.alpha_growth <= 2.0, "alpha_growth must lie in [0, 2]");
    if (g.alpha_growth == 0.0) return Regime::alpha0;
    if (g.alpha_growth == 2.0) return Regime::alpha2;
    return Regime::alpha_mid;
}

nlohmann::json to_json(const BoundReport& r) {
    nlohmann::json j;
    j["value"] = std::isfinite(r.value) ? nlohmann::json(r.value) : nlohmann::json(nullptr);
    j["kind"] = kind_name(r.kind);
    j["regime"] = r.regime ? nlohmann::json(regime_name(*r.regime)) : nlohmann::json(nullptr);
    nlohmann::json inter = nlohmann::json::object();
    for (const auto& [k, v] : r.intermediates)
        inter[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(std::to_string(v));
    j["intermediates"] = inter;
    j["citation"] = r.citation;
    j["infeasible"] = r.infeasible;
    if (r.infeasible) j["infeasible_reason"] = r.infeasible_reason;
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

double BoundQuery::init(const std::string& key) const {
    auto it = R_init.find(key);
    if (it == R_init.end()) throw DomainError("initial divergence '" + key + "' not supplied");
    require(it->second >= 0.0, "initial divergence '" + key + "' must be non-negative");
    return it->second;
}

double BoundQuery::init_qprime() const { return std::isinf(q_prime) ? init(kRinf0) : init(kRqprime0); }

double beta_wpi_cauchy(double nu, int d, double r) {
    require(nu > 0.0, "nu must be positive");
    require(d >= 1, "d must be >= 1");
    require(r > 0.0, "r must be positive");
    return 2.0 / nu + 2.0 * (d / nu + 1.0) * std::pow(r, -2.0 / nu);
}

SublinearBeta beta_wpi_sublinear(double alpha, int d, double r, std::optional<double> gamma) {
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    require(d >= 1, "d must be >= 1");
    require(r > 0.0, "r must be positive");
    SublinearBeta best{kInf, 0, 0, 0, 0};
    double best_log = kInf;
    auto consider = [&](double g) {
        SublinearBeta parts;
        double lv = log_beta_sublinear(alpha, d, r, g, parts);
        if (lv < best_log || best.gamma == 0.0) {
            best_log = lv;
            best = parts;
        }
    };
    if (gamma) {
        require(*gamma > 0.0 && *gamma <= 2.0 * alpha, "gamma must lie in (0, 2 alpha]");
        consider(*gamma);
    } else {
        for (int i = 0; i < 64; ++i) consider(2.0 * alpha * std::pow(10.0, -3.0 + 3.0 * i / 63.0));
    }
    best.value = std::exp(best_log);
    return best;
}

BoundReport beta_wpi_sublinear_report(double alpha, int d, double r, std::optional<double> gamma) {
    auto b = beta_wpi_sublinear(alpha, d, r, gamma);
    BoundReport rep;
    rep.value = b.value;
    rep.kind = BoundKind::beta;
    rep.regime = Regime::alpha_mid;
    rep.citation = "wpi-sublinear";
    rep.intermediates = {{"a", b.a}, {"b", b.b}, {"C_d_alpha", b.C}, {"gamma", b.gamma}, {"r", r}};
    return rep;
}

double beta_prime(const WeightFn& beta, double u, double r) {
    require(u > 2.0, "u must exceed 2");
    require(r > 0.0, "r must be positive");
    const double e = std::isinf(u) ? 1.0 : u / (u - 2.0);
    const double ln_term = std::max(e * std::log(5.0 / r), 0.0);
    if (ln_term == 0.0) return 0.0;
    return beta(std::pow(r / 5.0, e)) * ln_term;
}

WeightFn resolve_beta(const WeightFn& beta_wpi, double q, double q_prime) {
    require(q_prime > q, "q' must exceed q");
    if (std::isinf(q_prime)) return beta_wpi;
    const double u = 2.0 * q_prime / q;
    return [beta_wpi, u](double r) { return beta_prime(beta_wpi, u, r); };
}

WeightFn family_beta(const PotentialSpec& spec) {
    validate(spec);
    switch (spec.family) {
        case Family::GenCauchy: {
            double nu = spec.nu;
            int d = spec.d;
            return [nu, d](double r) { return beta_wpi_cauchy(nu, d, r); };
        }
        case Family::Sublinear: {
            if (!(spec.alpha < 1.0)) throw UnsupportedFamily("explicit weighting needs alpha < 1");
            double a = spec.alpha;
            int d = spec.d;
            return [a, d](double r) { return beta_wpi_sublinear(a, d, r).value; };
        }
        case Family::Gaussian: return [](double) { return 1.0; };
        case Family::RadialCustom: break;
    }
    throw UnsupportedFamily("no weighting available for radial_custom");
}

BoundReport diffusion_time_bound(const BoundQuery& query, const WeightFn& beta_wpi) {
    const double q = query.q, eps = query.eps;
    require(q > 1.0, "q must exceed 1");
    require(query.q_prime > q, "q' must exceed q");
    require(eps > 0.0 && eps <= 1.0, "eps must lie in (0, 1]");
    BoundReport rep;
    rep.kind = BoundKind::time_T;
    rep.regime = spec_regime(query.spec);
    rep.citation = "diffusion-renyi-convergence";
    if (q < 2.0) flag(rep, "q >= 2 required");

    const double Rq0 = query.init(kRq0);
    WeightFn beta;
    double delta0 = 1.0;
    if (is_poincare(query.spec)) {
        beta = beta_wpi;
        rep.notes.push_back("Poincare target: weighting used directly, no q' initial divergence needed");
    } else {
        const double Rqp = query.init_qprime();
        delta0 = std::exp(q * Rqp);
        beta = resolve_beta(beta_wpi, q, query.q_prime);
        rep.intermediates["R_qprime0"] = Rqp;
    }
    const double b1 = beta(1.0 / (4.0 * delta0));
    const double ln_eps = std::log(1.0 / eps);
    const double b2 = ln_eps > 0.0 ? beta(eps / (4.0 * delta0)) : 0.0;
    const double t1 = q * b1 * Rq0;
    const double t2 = 0.5 * q * b2 * ln_eps;
    rep.value = t1 + t2;
    rep.intermediates.insert({{"delta0", delta0},
                              {"beta_at_1_over_4delta0", b1},
                              {"beta_at_eps_over_4delta0", b2},
                              {"R_q0", Rq0},
                              {"term_initial", t1},
                              {"term_accuracy", t2},
                              {"q", q},
                              {"eps", eps}});
    return rep;
}

BoundReport lmc_iteration_count(double s, double L, int d, double q, double eps, double T, double m, double R2) {
    require(s > 0.0 && s <= 1.0, "s must lie in (0, 1]");
    require(L > 0.0 && T > 0.0 && m > 0.0 && R2 > 0.0, "L, T, m and R2_hat0 must be positive");
    require(d >= 1 && q > 1.0 && eps > 0.0, "d >= 1, q > 1 and eps > 0 required");
    BoundReport rep;
    rep.kind = BoundKind::iters_N;
    rep.citation = "lmc-upper";
    if (eps > 1.0 / q) flag(rep, "eps <= 1/q violated");
    if (m < 1.0) flag(rep, "m >= 1 violated");
    if (L < 1.0) flag(rep, "L >= 1 violated");
    if (T < 1.0) flag(rep, "T >= 1 violated");
    if (R2 < 1.0) flag(rep, "R2_hat0 >= 1 violated");

    const double base = std::pow(T, 1.0 + 1.0 / s) * d * std::pow(q, 1.0 / s) * std::pow(L, 2.0 / s) /
                        std::pow(eps, 1.0 / s);
    const double lfac = std::pow(L, 1.0 / s - 1.0);
    const double t2 = std::pow(eps, 1.0 / (2 * s)) * std::pow(m, s) / (lfac * std::pow(T, 1.0 / (2 * s)) * d);
    const double logt = std::log(q * T * L * R2 / eps);
    const double t3 = std::pow(eps, 1.0 / (2 * s)) * std::pow(R2, s / 2) /
                      (lfac * std::pow(T, (1.0 - s * s) / (2 * s)) * d) * std::pow(std::max(logt, 0.0), s / 2);
    rep.value = base * std::max({1.0, t2, t3});
    rep.intermediates = {{"implicit_const", 1.0},
                         {"T", T},
                         {"base", base},
                         {"ratio_m", t2},
                         {"ratio_R2", t3},
                         {"m", m},
                         {"L", L},
                         {"s", s},
                         {"R2_hat0", R2},
                         {"h_implied", T / rep.value}};
    rep.notes.push_back("unit implicit constant; order-correct only");
    return rep;
}

BoundReport lmc_iteration_bound(const BoundQuery& query, const WeightFn& beta_wpi, double m, bool lift_to_one) {
    const double q = query.q, eps = query.eps;
    require(q > 1.0 && eps > 0.0, "q > 1 and eps > 0 required");
    const double k = 2.0 * q - 1.0;
    BoundReport pre;
    if (q < 2.0) flag(pre, "q >= 2 required");
    if (!(query.q_prime > k)) {
        flag(pre, "q' > 2q - 1 violated");
        pre.kind = BoundKind::iters_N;
        pre.citation = "lmc-upper";
        pre.value = std::numeric_limits<double>::quiet_NaN();
        return pre;
    }
    WeightFn beta;
    double delta0 = 1.0;
    if (is_poincare(query.spec)) {
        beta = beta_wpi;
    } else {
        delta0 = std::exp(k * query.init_qprime());
        beta = resolve_beta(beta_wpi, k, query.q_prime);
    }
    const double R0 = query.init(kR2qm1_0);
    const double b1 = beta(1.0 / (4.0 * delta0));
    const double b2 = beta(eps / (8.0 * delta0));
    double T = k * (b1 * R0 + b2 * std::log(2.0 / eps));
    auto hc = holder_constants(query.spec);
    double L = hc.L, R2 = query.init(kR2hat0);
    std::vector<std::string> lifted;
    if (lift_to_one) {
        auto lift = [&](double& v, const char* name) {
            if (v < 1.0) {
                lifted.push_back(std::string(name) + " = " + std::to_string(v) + " raised to 1");
                v = 1.0;
            }
        };
        lift(m, "m");
        lift(L, "L");
        lift(T, "T");
        lift(R2, "R2_hat0");
    }
    BoundReport rep = lmc_iteration_count(hc.s, L, query.spec.d, q, eps, T, m, R2);
    rep.notes.insert(rep.notes.end(), lifted.begin(), lifted.end());
    rep.regime = spec_regime(query.spec);
    if (pre.infeasible) flag(rep, pre.infeasible_reason);
    rep.intermediates.insert({{"delta0", delta0}, {"beta_at_1_over_4delta0", b1}, {"beta_at_eps_over_8delta0", b2}});
    return rep;
}

BoundReport disc_step_size(double s, double L, int d, double q, double eps, double T, double m, double R2,
                           double N_guess) {
    require(s > 0.0 && s <= 1.0, "s must lie in (0, 1]");
    require(L > 0.0 && T > 0.0 && m > 0.0 && R2 > 0.0 && N_guess > 0.0, "L, T, m, R2_hat0, N_guess must be positive");
    require(d >= 1 && q > 1.0 && eps > 0.0, "d >= 1, q > 1 and eps > 0 required");
    BoundReport rep;
    rep.kind = BoundKind::h_disc;
    rep.citation = "discretization-step";
    if (q > 1.0 / eps) flag(rep, "q <= 1/eps violated");
    if (eps > 1.0) flag(rep, "1/eps >= 1 violated");
    if (m < 1.0) flag(rep, "m >= 1 violated");
    if (L < 1.0) flag(rep, "L >= 1 violated");
    if (T < 1.0) flag(rep, "T >= 1 violated");
    if (R2 < 1.0) flag(rep, "R2_hat0 >= 1 violated");

    const double lead = std::pow(eps, 1.0 / s) / (d * std::pow(q, 1.0 / s) * std::pow(L, 2.0 / s) * std::pow(T, 1.0 / s));
    const double lfac = std::pow(L, 1.0 / s - 1.0);
    const double c2 = lfac * std::pow(T, 1.0 / (2 * s)) * d / (std::pow(eps, 1.0 / (2 * s)) * std::pow(m, s));
    auto h_at = [&](double N, double& c3) {
        // ln N is floored at 1 so the last term stays finite for tiny N.
        const double lnN = std::max(std::log(N), 1.0);
        c3 = lfac * std::pow(T, (1.0 - s * s) / (2 * s)) * d /
             (std::pow(eps, 1.0 / (2 * s)) * std::pow(R2, s / 2) * std::pow(lnN, s / 2));
        return lead * std::min({1.0, c2, c3});
    };
    double c3;
    const double h0 = h_at(N_guess, c3);
    const double N1 = T / h0;
    rep.value = h_at(N1, c3);
    rep.intermediates = {{"implicit_const", 1.0}, {"lead", lead},       {"ratio_m", c2}, {"ratio_R2", c3},
                         {"N_guess", N_guess},    {"N_refined", N1},    {"h_first", h0}};
    rep.notes.push_back("unit implicit constant; order-correct only");
    return rep;
}

double modified_target_m(const PotentialSpec& spec) {
    validate(spec);
    double lo = 0.0, hi = 1.0;
    while (radial_tail(spec, hi) > 0.5) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw NumericError("median radius search did not bracket");
    }
    while (hi - lo > 1e-10 * std::max(1.0, hi)) {
        double mid = 0.5 * (lo + hi);
        (radial_tail(spec, mid) > 0.5 ? lo : hi) = mid;
    }
    return 0.25 * (lo + hi);
}

PotentialSpec modified_target(const PotentialSpec& spec, double m, double T) {
    validate(spec);
    require(m > 0.0 && T > 0.0, "m and T must be positive");
    const double c = 1.0 / (6144.0 * T);
    const double R = 2.0 * m;
    PotentialSpec base = spec;
    RadialProfile p;
    p.f = [base, c, R](double s) {
        double e = std::max(std::sqrt(s) - R, 0.0);
        return radial_f(base, s) + c * e * e;
    };
    p.fprime = [base, c, R](double s) {
        double r = std::sqrt(s);
        double e = std::max(r - R, 0.0);
        return radial_fprime(base, s) + (e > 0.0 ? c * e / r : 0.0);
    };
    PotentialSpec out = PotentialSpec::radial_custom(spec.d, p);
    out.holder_L = holder_constants(spec).L + 2.0 * c;
    out.holder_s = 1.0;
    return out;
}

BoundReport lower_bound_complexity(const LowerBoundInput& in) {
    const auto& g = in.growth;
    require(g.b > 0.0, "b must be positive");
    require(in.d >= 1, "d must be >= 1");
    require(in.delta0 > 0.0, "delta0 must be positive");
    if (in.h) require(*in.h > 0.0, "h must be positive");
    const double d = in.d, b = g.b, a = g.alpha_growth, D = in.delta0;
    BoundReport rep;
    rep.regime = regime_of(g);
    rep.citation = "three-step-phase-transition";
    rep.intermediates["implicit_const"] = 1.0;
    rep.intermediates["delta0"] = D;
    double T = 0.0;
    switch (*rep.regime) {
        case Regime::alpha0: {
            const double nu = b - d;
            require(nu > 0.0, "alpha = 0 needs nu = b - d > 0");
            T = d * std::exp(D / nu) / (4.0 * nu);
            rep.intermediates["nu"] = nu;
            break;
        }
        case Regime::alpha_mid: {
            T = std::pow(std::pow(a, 2.0 / a - 1.0) / b, 1.0 - a / 2) * std::pow(d, 1.0 - a / 2) *
                std::pow(D, (2.0 - a) * (2.0 - a) / (2.0 * a)) / (2.0 * (2.0 - a) * b);
            rep.intermediates["delta0_exponent"] = (2.0 - a) * (2.0 - a) / (2.0 * a);
            break;
        }
        case Regime::alpha2: {
            if (in.h) require(*in.h < 1.0 / b, "alpha = 2 needs h < 1/b");
            const double c = 1.0;
            T = c * std::log(D / b) / (2.0 * (1.0 + c) * b);
            rep.intermediates["c"] = c;
            if (!(T > 0.0)) flag(rep, "delta0 <= b gives a vacuous bound");
            break;
        }
    }
    rep.intermediates["T_lower"] = T;
    if (in.h) {
        rep.kind = BoundKind::iters_N;
        rep.value = T / *in.h;
        rep.intermediates["N_lower"] = rep.value;
        rep.intermediates["h"] = *in.h;
    } else {
        rep.kind = BoundKind::time_T;
        rep.value = T;
    }
    if (in.delta0_min) {
        rep.intermediates["delta0_min"] = *in.delta0_min;
        if (D < *in.delta0_min) flag(rep, "delta0 below the threshold the bound needs");
    } else {
        rep.notes.push_back("delta0 threshold not checked");
    }
    return rep;
}

BoundReport delta0_threshold(const GrowthParams& g, int d, double q, double log_Z, double pi_moment) {
    require(g.b > 0.0 && d >= 1 && q > 1.0, "b > 0, d >= 1, q > 1 required");
    if (!std::isfinite(pi_moment)) throw MomentUndefined("pi moment of order 2q/(q-1) is infinite");
    require(pi_moment > 0.0, "pi_moment must be positive");
    const double b = g.b, a = g.alpha_growth, dd = d;
    const double e = (q - 1.0) / q;
    const double log_M = std::log(pi_moment);
    BoundReport rep;
    rep.kind = BoundKind::delta0_min;
    rep.regime = regime_of(g);
    rep.citation = "delta0-threshold";
    double t1 = 0, t2 = 0, t3 = 0;
    switch (*rep.regime) {
        case Regime::alpha0: {
            const double nu = b - dd;
            require(nu > 0.0, "alpha = 0 needs nu = b - d > 0");
            t1 = 1.0 + 2.0 * (log_Z + 0.5 * (dd + nu) * (std::log(dd + nu) - 1.0) - 0.5 * dd * std::log(2 * kPi));
            t2 = nu * (std::log(2.0) + 1.0 + e * log_M - std::log(dd));
            t3 = nu;
            break;
        }
        case Regime::alpha_mid: {
            const double p = a / (2.0 - a);
            t1 = std::pow(b, p) / a * std::pow(std::max(1.0, std::exp((1.0 + 2.0 * log_Z) / dd) / (2 * kPi)), p);
            t2 = std::pow(std::pow(2.0, 2.0 / (2.0 - a)) * kE * b * std::exp(e * log_M) /
                              (std::pow(a, 2.0 / a - 1.0) * dd),
                          p);
            t3 = 1.0 / a;
            break;
        }
        case Regime::alpha2: {
            const double c = 1.0;
            // The displayed first term carries an undefined constant a; a = 0 here.
            t1 = b * std::exp(2.0 * log_Z / dd - 1.0) / (4 * kPi);
            t2 = b * std::exp((1.0 + c) * e * (1.0 + log_M));
            t3 = 0.0;
            rep.intermediates["c"] = c;
            rep.notes.push_back("first term evaluated with its free constant a = 0");
            break;
        }
    }
    rep.value = std::max({t1, t2, t3});
    rep.intermediates.insert({{"term1", t1}, {"term2", t2}, {"term3", t3}, {"log_Z", log_Z}, {"pi_moment", pi_moment}});
    return rep;
}

BoundReport step_size_upper_bound(const PotentialSpec& spec, double q, double eps,
                                  std::optional<double> sigma2_override) {
    validate(spec);
    const double s2 = sigma2_override ? *sigma2_override : sigma2_eps(spec, q, eps);
    require(s2 > 0.0, "sigma2 must be positive");
    const double fp = radial_fprime(spec, s2);
    require(fp > 0.0, "f'(sigma2_eps) must be positive");
    BoundReport rep;
    rep.kind = BoundKind::h_max;
    rep.regime = spec_regime(spec);
    rep.citation = "step-size-upper-bound";
    rep.value = (1.0 / fp) * (1.0 - spec.d / (2.0 * fp * s2));
    rep.intermediates = {{"sigma2_eps", s2}, {"fprime_at_sigma2_eps", fp}, {"q", q}, {"eps", eps}};
    rep.notes.push_back("assumes g(r) = (1 - 2h f'(r))^2 r convex and non-decreasing");
    if (!(rep.value > 0.0)) flag(rep, "no step size reaches eps from above sigma2_eps");
    return rep;
}

namespace {

struct InitContext {
    GrowthParams g;
    int d;
    double log_Z;
    double V0;
};

double rinf_bound(const PotentialSpec& spec, const InitContext& c, double s2, const InitOptions& opt,
                  BoundReport& rep) {
    const double d = c.d, b = c.g.b, a = c.g.alpha_growth;
    switch (regime_of(c.g)) {
        case Regime::alpha0: {
            require(s2 >= 1.0 / b, "sigma2 >= 1/(d + nu) violated");
            const double nu = b - d;
            if (opt.cauchy_corollary) {
                require(spec.family == Family::GenCauchy && c.d >= 2, "the normalizing-constant estimate needs GenCauchy with d >= 2");
                rep.notes.push_back("normalizing-constant estimate; drops the 1/(2 sigma2) term of the general bound");
                return 0.5 * nu * std::log(s2) + (0.5 * nu * std::log(2.0) + std::lgamma(0.5 * nu)) +
                       std::log((d + nu) / (2 * kE));
            }
            return 0.5 * nu * std::log(s2) + c.log_Z - 0.5 * d * std::log(2 * kPi) + 0.5 * b * std::log(b / kE) +
                   0.5 / s2 + c.V0;
        }
        case Regime::alpha_mid:
            require(s2 >= 1.0 / b, "sigma2 >= 1/b violated");
            return std::pow(b, 2.0 / (2.0 - a)) * std::pow(s2, a / (2.0 - a)) / a + c.log_Z -
                   0.5 * d * std::log(2 * kPi * s2) + 0.5 / s2 + c.V0;
        case Regime::alpha2: break;
    }
    throw DomainError("no R_inf bound for alpha_growth = 2; use KL");
}

}  // namespace

BoundReport init_divergence_bound(const PotentialSpec& spec, double sigma2, InitKind kind, const InitOptions& opt) {
    validate(spec);
    require(sigma2 > 0.0 && std::isfinite(sigma2), "sigma2 must be positive");
    InitContext c{growth_params(spec), spec.d, log_normalizing_constant(spec), radial_f(spec, 0.0)};
    BoundReport rep;
    rep.kind = BoundKind::init_div;
    rep.regime = regime_of(c.g);
    rep.intermediates = {{"sigma2", sigma2}, {"log_Z", c.log_Z}, {"b", c.g.b}, {"alpha_growth", c.g.alpha_growth}};
    switch (kind) {
        case InitKind::Rinf:
            rep.citation = "init-renyi-variance";
            rep.value = rinf_bound(spec, c, sigma2, opt, rep);
            break;
        case InitKind::KL:
            if (*rep.regime == Regime::alpha2) {
                rep.citation = "init-kl-variance";
                rep.value = 0.5 * (c.g.b * sigma2 - 1.0) * c.d + c.log_Z - 0.5 * c.d * std::log(2 * kPi * sigma2) + c.V0;
            } else {
                rep.citation = "init-renyi-variance";
                rep.value = rinf_bound(spec, c, sigma2, opt, rep);
                rep.notes.push_back("KL <= R_inf");
            }
            break;
        case InitKind::R2_hat: {
            rep.citation = "modified-target-renyi";
            require(opt.T.has_value() && *opt.T > 0.0, "R2_hat needs the horizon T");
            const double gamma = 1.0 / (3072.0 * *opt.T);
            require(sigma2 <= 1.0 / gamma, "sigma2 <= 3072 T violated");
            const double s = 2.0 * sigma2;
            double r2;
            if (spec.family == Family::Gaussian) {
                require(s < 2.0, "R_2 to a standard Gaussian is infinite for 2 sigma2 >= 2");
                r2 = -0.5 * c.d * std::log(2.0 * s - s * s);
                rep.notes.push_back("exact Gaussian R_2 at 2 sigma2");
            } else {
                r2 = rinf_bound(spec, c, s, opt, rep);
                rep.notes.push_back("R_2 <= R_inf at 2 sigma2");
            }
            rep.intermediates["R2_at_2sigma2"] = r2;
            rep.intermediates["T"] = *opt.T;
            rep.value = c.d * std::log(2.0) + r2;
            break;
        }
    }
    return rep;
}

BoundReport init_holder_bound(const PotentialSpec& spec, double m, double T) {
    validate(spec);
    require(m > 0.0 && T > 0.0, "m and T must be positive");
    const auto hc = holder_constants(spec);
    const double L = hc.L, d = spec.d;
    // Every built-in profile is increasing in ||x||^2, so V(0) = min V.
    const double osc = 0.0;
    BoundReport rep;
    rep.kind = BoundKind::init_div;
    rep.regime = spec_regime(spec);
    rep.citation = "init-holder-gaussian";
    rep.value = 2.0 + L + osc + 0.5 * d * std::log(12.0 * m * m * L);
    rep.intermediates = {{"sigma2", 1.0 / (2.0 * L + 1.0)},
                         {"L", L},
                         {"m", m},
                         {"R_inf_modified", 3.0 + L + osc + 0.5 * d * std::log(12.0 * (m + 6144.0 * T) * (m + 6144.0 * T) * L)}};
    return rep;
}

double sigma2_for_delta0(const GrowthParams& g, int d, double delta0) {
    require(delta0 > 0.0, "delta0 must be positive");
    switch (regime_of(g)) {
        case Regime::alpha0: {
            const double nu = g.b - d;
            require(nu > 0.0, "alpha = 0 needs nu = b - d > 0");
            return std::exp(delta0 / nu);
        }
        case Regime::alpha_mid: {
            const double a = g.alpha_growth;
            return std::pow(a * delta0, (2.0 - a) / a) / g.b;
        }
        case Regime::alpha2: return 2.0 * delta0 / (g.b * d);
    }
    return 0.0;
}

}  // namespace heavytail
