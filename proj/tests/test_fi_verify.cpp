#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "heavytail/errors.hpp"
#include "heavytail/fi_verify.hpp"

using namespace heavytail;

namespace {

DensityGrid normal_on(const DensityGrid& layout, double s2) {
    return discretize(layout, [s2](double x) { return std::exp(-0.5 * x * x / s2) / std::sqrt(2 * std::numbers::pi * s2); });
}

PotentialSpec wide_gaussian() {
    return PotentialSpec::radial_custom(1, {[](double s) { return s / 8.0; }, [](double) { return 1.0 / 8.0; }});
}

bool has_violation_for(const CheckReport& r, const std::string& name) {
    for (const auto& e : r.entries)
        if (e.function == name && e.margin < 0) return true;
    return false;
}

}  // namespace

TEST_CASE("density grids") {
    auto g = sinh_grid(10.0, 1.0, 400);
    CHECK(g.size() == 400);
    CHECK(g.nodes.front() - 0.5 * g.widths.front() == doctest::Approx(-10.0));
    double total = 0;
    for (double w : g.widths) total += w;
    CHECK(total == doctest::Approx(20.0).epsilon(1e-13));
    CHECK(g.widths[200] < g.widths[0]);

    auto n = normal_on(g, 1.0);
    CHECK_NOTHROW(n.validate());
    CHECK(n.second_moment() == doctest::Approx(1.0).epsilon(1e-3));
    n.values[3] = -1.0;
    CHECK_THROWS_AS(n.validate(), DomainError);
}

TEST_CASE("test function set") {
    auto fs = default_test_functions();
    CHECK(fs.functions.size() >= 20);
    CHECK(max_derivative_error(fs) < 1e-6);
    for (const auto& t : fs.functions) {
        CHECK(std::isfinite(t.osc));
        CHECK(t.osc >= 0.0);
    }
    CHECK(default_r_grid().size() >= 8);
}

TEST_CASE("weak Poincare check for Cauchy") {
    auto fs = default_test_functions();
    auto spec = PotentialSpec::gen_cauchy(1, 2);
    auto beta = family_beta(spec);
    auto rep = wpi_check(spec, beta, fs, default_r_grid());
    CHECK(rep.entries.size() == fs.functions.size() * default_r_grid().size());
    CHECK(rep.n_violations == 0);
    for (const auto& e : rep.entries) {
        if (e.function != "constant") continue;
        CHECK(e.lhs == 0.0);
        CHECK(e.rhs == 0.0);
    }
    auto bad = wpi_check(spec, beta, fs, default_r_grid(), true);
    CHECK(bad.n_violations > 0);
    CHECK(!has_violation_for(bad, "constant"));
    CHECK(to_json(bad)["passed"] == false);

    for (double nu : {1.0, 4.0}) {
        auto s = PotentialSpec::gen_cauchy(1, nu);
        CHECK(wpi_check(s, family_beta(s), fs, default_r_grid()).n_violations == 0);
    }
    CHECK_THROWS_AS(wpi_check(PotentialSpec::gen_cauchy(2, 2), beta, fs, default_r_grid()), DomainError);
}

TEST_CASE("weak Poincare check for sublinear") {
    auto fs = default_test_functions();
    for (double a : {0.3, 0.5, 0.7}) {
        auto s = PotentialSpec::sublinear(1, a);
        CHECK(wpi_check(s, family_beta(s), fs, default_r_grid()).n_violations == 0);
    }
    // A weighting that is far too small is caught.
    auto s = PotentialSpec::sublinear(1, 0.5);
    CHECK(wpi_check(s, [](double) { return 1e-3; }, fs, default_r_grid()).n_violations > 0);
}

TEST_CASE("converse weighted inequality") {
    CHECK(converse_constant(1, 3) == 0.25);
    CHECK(converse_constant(1, 1) == 2.0);
    auto fs = default_test_functions();
    for (double nu : {1.0, 2.0, 3.0, 5.0}) {
        auto rep = converse_pi_check(PotentialSpec::gen_cauchy(1, nu), fs);
        CHECK(rep.n_violations == 0);
        CHECK(converse_pi_check(PotentialSpec::gen_cauchy(1, nu), fs, true).n_violations > 0);
    }
    CHECK_THROWS_AS(converse_pi_check(PotentialSpec::gaussian(1), fs), UnsupportedFamily);
}

TEST_CASE("weighted inequality for sublinear") {
    CHECK(weighted_constant(1, 0.5) == doctest::Approx(120.0).epsilon(1e-15));
    auto fs = default_test_functions();
    for (double a : {0.3, 0.5, 0.7}) {
        auto s = PotentialSpec::sublinear(1, a);
        auto rep = weighted_pi_check(s, fs);
        CHECK(rep.n_violations == 0);
        CHECK(weighted_pi_check(s, fs, true).n_violations > 0);
    }
    CHECK(weighted_pi_check(PotentialSpec::sublinear(1, 0.5), fs).constant ==
          doctest::Approx(120.0 * std::numbers::e));
}

TEST_CASE("grid Renyi divergence") {
    auto layout = sinh_grid(12.0, 2.0, 3000);
    auto rho = normal_on(layout, 1.0);
    // R_2(N(0,1) || N(0,4)) = ln(4 / sqrt 7).
    CHECK(std::abs(renyi_quadrature(rho, wide_gaussian(), 2.0) - 0.413339286592233966) < 1e-3);

    auto g = PotentialSpec::gaussian(1);
    auto pi = pi_grid(g, layout);
    auto self = fq_gq(pi, pi, 2.0);
    CHECK(std::abs(self.R) < 1e-12);
    CHECK(std::abs(self.G) < 1e-20);

    double prev = 0.0;
    auto wide = pi_grid(wide_gaussian(), layout);
    for (double q : {1.5, 2.0, 3.0, 5.0}) {
        double v = fq_gq(rho, wide, q).R;
        CHECK(v >= prev);
        prev = v;
    }

    // R_2(N(0,4) || Cauchy nu = 2), mpmath.
    auto cl = sinh_grid(1e5, 1.0, 3000);
    CHECK(std::abs(renyi_quadrature(normal_on(cl, 4.0), PotentialSpec::gen_cauchy(1, 2), 2.0) -
                   0.623226468956206220661) < 1e-3);

    auto zero_pi = wide;
    zero_pi.values[10] = 0.0;
    auto bad = fq_gq(rho, zero_pi, 2.0);
    CHECK(bad.support_violation);
    CHECK(std::isinf(bad.R));

    for (double q : {2.0, 3.0}) CHECK(renyi_variance_gap(rho, wide, q) >= -1e-12);
    CHECK(renyi_variance_gap(rho, wide, 2.0) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("Fokker-Planck solver") {
    auto g = PotentialSpec::gaussian(1);
    auto layout = sinh_grid(16.0, 4.0, 1200);
    auto pi = pi_grid(g, layout);
    const double dt = 0.9 * max_stable_dt(g, layout);

    auto still = fokker_planck_evolve_1d(g, pi, 1.0, dt, 0.1);
    CHECK(still.size() == 11);
    for (const auto& fr : still) {
        double sup = 0;
        for (std::size_t i = 0; i < pi.size(); ++i) sup = std::max(sup, std::abs(fr.rho.values[i] - pi.values[i]));
        CHECK(sup < 1e-6);
    }

    // Ornstein-Uhlenbeck: sigma^2(t) = 1 + (sigma0^2 - 1) e^(-2t).
    auto frames = fokker_planck_evolve_1d(g, normal_on(layout, 4.0), 1.5, dt, 0.25);
    for (const auto& fr : frames) {
        CHECK(std::abs(fr.rho.mass() - 1.0) < 1e-8);
        CHECK(std::abs(fr.rho.second_moment() - (1.0 + 3.0 * std::exp(-2.0 * fr.t))) < 1e-3);
    }

    CHECK_THROWS_AS(fokker_planck_evolve_1d(g, pi, 1.0, 10 * max_stable_dt(g, layout)), DomainError);
    auto narrow = sinh_grid(3.0, 1.0, 100);
    CHECK_THROWS_AS(fokker_planck_evolve_1d(g, pi_grid(g, narrow), 1.0, 1e-4), DomainError);

    auto rows = trajectory_table(frames, pi, 2.0);
    std::ostringstream os;
    write_trajectory_csv(os, rows);
    CHECK(os.str().rfind("t,R_q,F_q,G_q,mass,m2\n", 0) == 0);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].R <= rows[i - 1].R + 1e-6);
}

TEST_CASE("Renyi decay check for Cauchy") {
    FPCheckOptions opt;
    auto spec = PotentialSpec::gen_cauchy(1, 2);
    auto rep = fp_check(spec, opt);
    INFO(to_json(rep).dump());
    CHECK(rep.passed());
    CHECK(rep.n_derivative_points > 10);
    CHECK(rep.rows.front().R == doctest::Approx(0.6232).epsilon(2e-3));
    CHECK(rep.R_inf0 == doctest::Approx(1.4334).epsilon(2e-3));
    for (const auto& h : rep.hits) CHECK(std::isfinite(h.time));

    opt.falsify = true;
    CHECK(!fp_check(spec, opt).passed());
}
