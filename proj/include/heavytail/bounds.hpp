#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "heavytail/targets.hpp"

namespace heavytail {

enum class BoundKind { time_T, iters_N, beta, h_max, h_disc, delta0_min, init_div };
enum class Regime { alpha0, alpha_mid, alpha2 };

std::string kind_name(BoundKind k);
std::string regime_name(Regime r);
Regime regime_of(const GrowthParams& g);

// Every calculator returns one of these. Unnamed constants hidden by order
// notation are set to 1 and recorded as intermediates["implicit_const"].
struct BoundReport {
    double value = 0.0;
    BoundKind kind = BoundKind::beta;
    std::optional<Regime> regime;
    std::map<std::string, double> intermediates;
    std::string citation;
    bool infeasible = false;
    std::string infeasible_reason;
    std::vector<std::string> notes;
};

nlohmann::json to_json(const BoundReport& r);

using WeightFn = std::function<double(double)>;

// Initial divergences are looked up by these keys in BoundQuery::R_init.
inline constexpr const char* kRq0 = "R_q0";
inline constexpr const char* kR2qm1_0 = "R_2q-1_0";
inline constexpr const char* kRqprime0 = "R_qprime0";
inline constexpr const char* kRinf0 = "R_inf0";
inline constexpr const char* kKL0 = "KL0";
inline constexpr const char* kR2hat0 = "R2_hat0";

struct BoundQuery {
    PotentialSpec spec;
    double q = 2.0;
    double q_prime = std::numeric_limits<double>::infinity();
    double eps = 1.0;
    std::optional<double> h;
    std::optional<double> delta0;
    std::optional<double> sigma2;
    std::map<std::string, double> R_init;

    double init(const std::string& key) const;
    // R_{q'} at time zero: R_inf0 when q' is infinite, R_qprime0 otherwise.
    double init_qprime() const;
};

// Weak Poincare weightings.
double beta_wpi_cauchy(double nu, int d, double r);

struct SublinearBeta {
    double value;
    double gamma;
    double a, b, C;
};
// Explicit weighting for exp(-(1 + ||x||^2)^(alpha/2)), alpha in (0, 1).
// gamma in (0, 2 alpha]; when omitted the bound is minimised over 64
// log-spaced gammas in [2 alpha 1e-3, 2 alpha].
SublinearBeta beta_wpi_sublinear(double alpha, int d, double r, std::optional<double> gamma = std::nullopt);
BoundReport beta_wpi_sublinear_report(double alpha, int d, double r, std::optional<double> gamma = std::nullopt);

// WPI weighting with an L^u regulariser, built from an Osc^2 weighting.
double beta_prime(const WeightFn& beta, double u, double r);

// The weighting used by the diffusion bounds at orders (q, q').
WeightFn resolve_beta(const WeightFn& beta_wpi, double q, double q_prime);

// Default weighting for a family: beta_wpi_cauchy, beta_wpi_sublinear, or 1
// for the Gaussian (Poincare constant).
WeightFn family_beta(const PotentialSpec& spec);

// Time for R_q(rho_T || pi) <= eps along the diffusion.
BoundReport diffusion_time_bound(const BoundQuery& query, const WeightFn& beta_wpi);

// Iteration count given the diffusion horizon T (unit constant).
BoundReport lmc_iteration_count(double s, double L, int d, double q, double eps, double T, double m, double R2_hat0);

// Composes the horizon T from the initial divergences and returns N = T / h.
// With lift_to_one, m, L, T and R2_hat0 below 1 are raised to 1 (the count is
// non-decreasing in each) instead of being flagged.
BoundReport lmc_iteration_bound(const BoundQuery& query, const WeightFn& beta_wpi, double m, bool lift_to_one = false);

// Discretisation step size; ln N uses N_guess refined once by N = T / h.
BoundReport disc_step_size(double s, double L, int d, double q, double eps, double T, double m, double R2_hat0,
                           double N_guess);

// Half the median radius of pi.
double modified_target_m(const PotentialSpec& spec);
// pi with the extra quadratic confinement max(||x|| - 2m, 0)^2 / (6144 T).
PotentialSpec modified_target(const PotentialSpec& spec, double m, double T);

struct LowerBoundInput {
    GrowthParams growth;
    int d = 1;
    std::optional<double> h;
    double delta0 = 0.0;
    // When set, delta0 below it marks the report infeasible.
    std::optional<double> delta0_min;
};
BoundReport lower_bound_complexity(const LowerBoundInput& in);

// Smallest delta0 the lower bound applies to. log_Z is ln of the normalizing
// constant, pi_moment the order 2q/(q-1) moment of pi.
BoundReport delta0_threshold(const GrowthParams& growth, int d, double q, double log_Z, double pi_moment);

// Largest step size with which LMC can reach R_q <= eps from far away.
BoundReport step_size_upper_bound(const PotentialSpec& spec, double q, double eps,
                                  std::optional<double> sigma2_override = std::nullopt);

enum class InitKind { Rinf, KL, R2_hat };

struct InitOptions {
    // Horizon T of the modified target, required for R2_hat.
    std::optional<double> T;
    // GenCauchy, d >= 2: use the normalizing-constant estimate instead of
    // the exact constant.
    bool cauchy_corollary = false;
};

// Upper bound on the divergence of N(0, sigma2 I_d) from pi.
BoundReport init_divergence_bound(const PotentialSpec& spec, double sigma2, InitKind kind,
                                  const InitOptions& opt = {});

// Bounds for mu_0 = N(0, (2L + 1)^-1 I_d): R_inf to pi and to the modified target.
BoundReport init_holder_bound(const PotentialSpec& spec, double m, double T);

// Gaussian variance whose divergence bound is delta0, inverting the choices
// made in the lower-bound argument: e^(delta0/nu), (alpha delta0)^((2-alpha)/alpha) / b,
// or 2 delta0 / (b d).
double sigma2_for_delta0(const GrowthParams& g, int d, double delta0);

}  // namespace heavytail
