#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "heavytail/bounds.hpp"
#include "heavytail/targets.hpp"

namespace heavytail {

// Piecewise-constant density on cells [nodes[i] - widths[i]/2, nodes[i] + widths[i]/2].
struct DensityGrid {
    std::vector<double> nodes;
    std::vector<double> widths;
    std::vector<double> values;

    std::size_t size() const { return nodes.size(); }
    double mass() const;
    double second_moment() const;
    // Throws DomainError unless values >= 0 and the mass is 1 within 1e-8.
    void validate() const;
};

// Cells with faces at scale * sinh(xi), xi uniform, outermost faces at
// +-half_width. Values are zero.
DensityGrid sinh_grid(double half_width, double scale, std::size_t n_cells);

// Cell averages of a density on the layout of `grid`, renormalised to mass 1.
DensityGrid discretize(const DensityGrid& grid, const std::function<double(double)>& density);

// pi of a d = 1 spec on the layout of `grid`.
DensityGrid pi_grid(const PotentialSpec& spec, const DensityGrid& grid);

struct TestFunction {
    std::string name;
    std::function<double(double)> f;
    std::function<double(double)> fp;
    // Support; infinite ends for global functions.
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    // Points where f changes quickly; quadrature splits there.
    std::vector<double> breaks;
    double osc = 0.0;
};

struct TestFunctionSet {
    std::vector<TestFunction> functions;
};

// Constant, monomials up to degree 6 times smooth bumps, and tanh ramps.
TestFunctionSet default_test_functions();

// Largest |f' - central difference| over a sample of points per function.
double max_derivative_error(const TestFunctionSet& fset);

// Ten log-spaced values in [1e-3, 1].
std::vector<double> default_r_grid();

struct CheckEntry {
    std::string function;
    double r = 0.0;  // 0 for the r-free inequalities
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // rhs + slack - lhs; negative is a violation
};

struct CheckReport {
    std::string suite;
    std::string target;
    bool falsify = false;
    double constant = 0.0;  // C used on the right side, after any falsification scaling
    std::vector<CheckEntry> entries;
    std::size_t n_violations = 0;
    double max_violation = 0.0;

    bool passed() const { return n_violations == 0; }
};

nlohmann::json to_json(const CheckReport& r);

inline constexpr double kCheckSlack = 1e-9;
inline constexpr double kFalsifyFactor = 1e6;

// Var(f) <= beta(r) E f'^2 + r Osc(f)^2 for every f and r. With falsify, beta
// is divided by 1e6.
CheckReport wpi_check(const PotentialSpec& spec, const WeightFn& beta, const TestFunctionSet& fset,
                      const std::vector<double>& r_grid, bool falsify = false);

// 1/(d + nu) when nu >= d + 2, else 2/nu.
double converse_constant(int d, double nu);
// inf_c E[(f - c)^2 w] <= C E f'^2 with w = 1/(1 + x^2), GenCauchy only.
CheckReport converse_pi_check(const PotentialSpec& spec, const TestFunctionSet& fset, bool falsify = false);

// 12 d / alpha^3 + (d + alpha) / alpha^4.
double weighted_constant(int d, double alpha);
// Var(f) <= e C E[|x|^(2 - 2 alpha) f'^2], Sublinear only.
CheckReport weighted_pi_check(const PotentialSpec& spec, const TestFunctionSet& fset, bool falsify = false);

// Sinh grid wide enough that pi and N(0, sigma0_2) both leave < 1e-10 outside it.
DensityGrid fp_layout(const PotentialSpec& spec, double sigma0_2, std::size_t n_cells);

// N(0, sigma2) cell averages on the layout of `grid`.
DensityGrid gaussian_on(const DensityGrid& grid, double sigma2);

// Largest dt keeping the explicit update positive on this grid.
double max_stable_dt(const PotentialSpec& spec, const DensityGrid& grid);

struct FPFrame {
    double t;
    DensityGrid rho;
};

// Zero-flux finite volumes for d/dt rho = (rho V')' + rho'' with fluxes
// sqrt(pi_i pi_j) (u_i - u_j) / (x_j - x_i), u = rho / pi, so pi is an exact
// fixed point. Frames every record_dt (0: 100 frames), always including t = 0
// and t_final.
std::vector<FPFrame> fokker_planck_evolve_1d(const PotentialSpec& spec, const DensityGrid& rho0, double t_final,
                                             double dt, double record_dt = 0.0);

struct GridRenyi {
    double R = 0.0;
    double F = 1.0;
    double G = 0.0;
    // rho has mass where pi < 1e-300: R is +inf.
    bool support_violation = false;
};

// F_q = E_pi u^q, G_q = (4/q^2) E_pi |(u^(q/2))'|^2, R_q = ln F_q / (q - 1).
GridRenyi fq_gq(const DensityGrid& rho, const DensityGrid& pi, double q);
GridRenyi fq_gq(const DensityGrid& rho, const PotentialSpec& spec, double q);
double renyi_quadrature(const DensityGrid& rho, const PotentialSpec& spec, double q);

// Var_pi(u^(q/2)) - F_q (1 - e^(-R_q)); non-negative up to roundoff.
double renyi_variance_gap(const DensityGrid& rho, const DensityGrid& pi, double q);

// max ln(rho/pi) over cells with mass.
double grid_log_ratio_sup(const DensityGrid& rho, const DensityGrid& pi);

struct TrajectoryRow {
    double t, R, F, G, mass, m2;
};
std::vector<TrajectoryRow> trajectory_table(const std::vector<FPFrame>& frames, const DensityGrid& pi, double q);
void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& rows);

struct FPCheckOptions {
    double sigma0_2 = 4.0;  // rho0 = N(0, sigma0_2)
    double q = 2.0;
    std::vector<double> eps{0.5, 0.25, 0.1};
    double t_final = 5.0;
    double record_dt = 0.01;
    std::size_t n_cells = 2000;
    bool falsify = false;  // divides the time bound by 1e6
};

struct FPCheckReport {
    std::vector<TrajectoryRow> rows;
    double max_mass_error = 0.0;
    double max_increase = 0.0;        // largest R_q(t_{k+1}) - R_q(t_k)
    double max_derivative_rel_error = 0.0;
    std::size_t n_derivative_points = 0;
    double min_variance_gap = 0.0;
    struct Hit {
        double eps;
        double time;   // +inf if not reached by t_final
        double bound;  // diffusion_time_bound, unit constants
    };
    std::vector<Hit> hits;
    double R_inf0 = 0.0;
    std::vector<std::string> violations;

    bool passed() const { return violations.empty(); }
};

nlohmann::json to_json(const FPCheckReport& r);

// Runs the solver from N(0, sigma0_2) and checks mass, monotone decay, the
// time derivative of R_q, the variance gap, and the time to each eps against
// the diffusion bound with the family weighting. d = 1 GenCauchy or Gaussian.
FPCheckReport fp_check(const PotentialSpec& spec, const FPCheckOptions& opt = {});

}  // namespace heavytail
