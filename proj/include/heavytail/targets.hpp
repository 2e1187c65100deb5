#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace heavytail {

enum class Family { GenCauchy, Sublinear, Gaussian, RadialCustom };

// ||grad V(x)|| <= b ||x|| / (1 + ||x||^2)^(1 - alpha/2)
struct GrowthParams {
    double b = 1.0;
    double alpha_growth = 2.0;
};

// V(x) = f(||x||^2). Both f and f' are needed.
struct RadialProfile {
    std::function<double(double)> f;
    std::function<double(double)> fprime;
};

struct PotentialSpec {
    Family family = Family::Gaussian;
    int d = 1;
    double nu = 0.0;
    double alpha = 2.0;
    double lambda = 1.0;
    RadialProfile radial;                 // RadialCustom only
    std::optional<GrowthParams> growth;   // RadialCustom only
    double holder_L = 1.0;                // RadialCustom only
    double holder_s = 1.0;                // RadialCustom only

    static PotentialSpec gen_cauchy(int d, double nu);
    static PotentialSpec sublinear(int d, double alpha);
    static PotentialSpec gaussian(int d);
    static PotentialSpec radial_custom(int d, RadialProfile p);
};

void validate(const PotentialSpec& spec);
std::string family_name(Family f);
Family family_from_name(const std::string& name);

// Radial profile f and f' at s = ||x||^2, for every family.
double radial_f(const PotentialSpec& spec, double s);
double radial_fprime(const PotentialSpec& spec, double s);

double potential_value(const PotentialSpec& spec, std::span<const double> x);
std::vector<double> potential_grad(const PotentialSpec& spec, std::span<const double> x);
// In-place variant used by the sampler hot loop; no input checking.
void potential_grad_into(const PotentialSpec& spec, const double* x, double* out);

GrowthParams growth_params(const PotentialSpec& spec);

struct HolderConstants {
    double L;
    double s;
};
HolderConstants holder_constants(const PotentialSpec& spec);

// For Sublinear, `value` is the exact moment of exp(-lambda ||x||^alpha) and
// `upper` is the bound on the moment of exp(-(1 + ||x||^2)^(alpha/2)).
struct MomentResult {
    double value;
    std::optional<double> upper;
};
MomentResult closed_form_moment(const PotentialSpec& spec, double p);

// E ||x||^p under pi by radial quadrature. Works for every family.
double radial_moment(const PotentialSpec& spec, double p, double rel_tol = 1e-12);

// Raw upper bound on pi(||x|| >= R); not clamped to [0, 1].
double tail_bound(const PotentialSpec& spec, double R);

// Exact pi(||x|| >= R) by radial quadrature.
double radial_tail(const PotentialSpec& spec, double R);

double normalizing_constant(const PotentialSpec& spec);
double log_normalizing_constant(const PotentialSpec& spec);

// Surface area of the unit sphere in R^d.
double sphere_area(int d);

// Density of pi at radius r (not including the r^(d-1) Jacobian).
double density_at_radius(const PotentialSpec& spec, double r);

// Row-major n x d matrix of i.i.d. draws from pi.
std::vector<double> direct_sampler(const PotentialSpec& spec, std::size_t n, std::uint64_t seed);

nlohmann::json to_json(const PotentialSpec& spec);
PotentialSpec spec_from_json(const nlohmann::json& j);

// Growth-condition and Hoelder property checks over a deterministic point set.
struct PropertyCheck {
    std::size_t checked = 0;
    std::size_t violations = 0;
    double worst_ratio = 0.0;
};
PropertyCheck check_growth_condition(const PotentialSpec& spec, std::size_t n_points, double max_norm,
                                     std::uint64_t seed);
PropertyCheck check_holder(const PotentialSpec& spec, std::size_t n_pairs, double max_norm, std::uint64_t seed);

}  // namespace heavytail
