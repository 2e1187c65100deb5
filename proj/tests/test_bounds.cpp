#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "heavytail/bounds.hpp"
#include "heavytail/diagnostics.hpp"
#include "heavytail/errors.hpp"

using namespace heavytail;

namespace {

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace

TEST_CASE("Cauchy weighting") {
    CHECK(beta_wpi_cauchy(2, 1, 1.0) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(beta_wpi_cauchy(2, 1, 0.01) == doctest::Approx(301.0).epsilon(1e-13));
    double prev = INFINITY;
    for (double r = 1e-4; r <= 10; r *= 1.7) {
        double v = beta_wpi_cauchy(0.7, 3, r);
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("sublinear weighting") {
    // Straight transcription of the same expression, evaluated without logs.
    auto b = beta_wpi_sublinear(0.5, 1, 1.0, 1.0);
    CHECK(b.C == doctest::Approx(120.0).epsilon(1e-15));
    CHECK(b.a == doctest::Approx(53201.2039123006816360590777161).epsilon(1e-12));
    CHECK(b.b == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(b.value == doctest::Approx(3563264364765.13697518292404379).epsilon(1e-11));

    std::vector<double> ld, lv;
    for (int d : {2, 4, 8, 16, 32, 64}) {
        ld.push_back(std::log(d));
        lv.push_back(std::log(beta_wpi_sublinear(0.5, d, 0.1, 1.0).value));
    }
    CHECK(std::abs(slope(ld, lv) - 4.0) < 0.1);

    double prev = INFINITY;
    for (double r = 1e-6; r <= 2; r *= 3) {
        double v = beta_wpi_sublinear(0.3, 2, r).value;
        CHECK(v <= prev);
        prev = v;
    }
    auto opt = beta_wpi_sublinear(0.5, 3, 0.01);
    CHECK(opt.value <= beta_wpi_sublinear(0.5, 3, 0.01, 1.0).value);
    CHECK(opt.gamma > 0.0);
    CHECK(opt.gamma <= 1.0);
    CHECK_THROWS_AS(beta_wpi_sublinear(0.5, 1, 1.0, 1.5), DomainError);
    CHECK_THROWS_AS(beta_wpi_sublinear(0.5, 1, 1.0, 0.0), DomainError);
}

TEST_CASE("beta_prime") {
    auto c = [](double) { return 2.0; };
    CHECK(beta_prime(c, 3.0, 5.0) == 0.0);
    CHECK(beta_prime(c, 4.0, 1.0) == doctest::Approx(2.0 * std::log(25.0)).epsilon(1e-14));
    auto cau = [](double r) { return beta_wpi_cauchy(2, 1, r); };
    CHECK(beta_prime(cau, INFINITY, 1.0) == doctest::Approx(cau(0.2) * std::log(5.0)).epsilon(1e-14));
    CHECK(beta_prime(cau, 1e9, 1.0) == doctest::Approx(cau(0.2) * std::log(5.0)).epsilon(1e-6));
    CHECK_THROWS_AS(beta_prime(c, 2.0, 1.0), DomainError);
    double prev = INFINITY;
    for (double r = 1e-4; r <= 10; r *= 2) {
        double v = beta_prime(cau, 3.0, r);
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("diffusion time bound") {
    BoundQuery q;
    q.spec = PotentialSpec::gaussian(1);
    q.q = 2;
    q.eps = 0.1;
    q.R_init[kRq0] = 3.0;
    const double c = 2.5;
    auto r = diffusion_time_bound(q, [c](double) { return c; });
    CHECK(r.value == doctest::Approx(6 * c + c * std::log(10.0)).epsilon(1e-14));

    q.eps = 1.0;
    CHECK(diffusion_time_bound(q, [c](double) { return c; }).value == doctest::Approx(6 * c));

    BoundQuery k;
    k.spec = PotentialSpec::gen_cauchy(1, 2);
    k.q = 2;
    k.eps = 0.5;
    k.R_init[kRq0] = 1.0;
    k.R_init[kRinf0] = 1.0;
    auto t = diffusion_time_bound(k, family_beta(k.spec));
    CHECK(t.intermediates["delta0"] == doctest::Approx(std::exp(2.0)));
    CHECK(t.value == doctest::Approx(302.95137520224871534346282879).epsilon(1e-13));

    // Non-decreasing in each initial divergence and in 1/eps.
    double prev = 0;
    for (double r0 : {0.5, 1.0, 2.0, 4.0}) {
        k.R_init[kRq0] = r0;
        double v = diffusion_time_bound(k, family_beta(k.spec)).value;
        CHECK(v >= prev);
        prev = v;
    }
    prev = 0;
    for (double e : {1.0, 0.5, 0.1, 0.01}) {
        k.eps = e;
        double v = diffusion_time_bound(k, family_beta(k.spec)).value;
        CHECK(v >= prev);
        prev = v;
    }
    k.q_prime = 1.5;
    CHECK_THROWS_AS(diffusion_time_bound(k, family_beta(k.spec)), DomainError);
}

TEST_CASE("LMC iteration count") {
    auto r = lmc_iteration_count(1, 1, 1, 2, 0.1, 10, 1, 1);
    CHECK(r.value == doctest::Approx(2000.0).epsilon(1e-14));
    CHECK(!r.infeasible);
    CHECK(r.intermediates["implicit_const"] == 1.0);
    CHECK(r.intermediates["h_implied"] == doctest::Approx(10.0 / 2000.0));
    CHECK(!lmc_iteration_count(1, 1, 1, 2, 0.5, 10, 1, 1).infeasible);
    auto bad = lmc_iteration_count(1, 1, 1, 2, 0.6, 10, 1, 1);
    CHECK(bad.infeasible);
    CHECK(bad.infeasible_reason.find("eps") != std::string::npos);
    CHECK(lmc_iteration_count(1, 1, 1, 2, 0.1, 10, 0.5, 1).infeasible);

    BoundQuery q;
    q.spec = PotentialSpec::gen_cauchy(1, 2);
    q.q = 2;
    q.eps = 0.25;
    q.R_init = {{kR2qm1_0, 1.0}, {kRinf0, 1.0}, {kR2hat0, 2.0}};
    double prev = 0;
    for (double r0 : {1.0, 2.0, 3.0}) {
        q.R_init[kR2qm1_0] = r0;
        auto rep = lmc_iteration_bound(q, family_beta(q.spec), 1.0);
        CHECK(std::isfinite(rep.value));
        CHECK(rep.value >= prev);
        prev = rep.value;
    }
    q.q_prime = 3.0;
    CHECK(lmc_iteration_bound(q, family_beta(q.spec), 1.0).infeasible);
}

TEST_CASE("discretization step size") {
    auto h = disc_step_size(1, 1, 2, 2, 0.1, 10, 1, 1, 1000);
    CHECK(h.value == doctest::Approx(2.5e-3).epsilon(1e-14));
    CHECK(disc_step_size(1, 1, 3, 2, 0.1, 10, 1, 1, 1000).value < h.value);
    CHECK(disc_step_size(1, 1, 2, 20, 0.1, 10, 1, 1, 1000).infeasible);
}

TEST_CASE("modified target radius") {
    CHECK(modified_target_m(PotentialSpec::gen_cauchy(1, 1)) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(modified_target_m(PotentialSpec::gaussian(1)) ==
          doctest::Approx(0.337244875098040871601113507271).epsilon(1e-8));
    auto base = PotentialSpec::radial_custom(
        2, {[](double s) { return std::pow(1 + s, 0.3); }, [](double s) { return 0.3 * std::pow(1 + s, -0.7); }});
    auto wide = PotentialSpec::radial_custom(2, {[](double s) { return std::pow(1 + s / 4, 0.3); },
                                                 [](double s) { return 0.075 * std::pow(1 + s / 4, -0.7); }});
    CHECK(modified_target_m(wide) == doctest::Approx(2 * modified_target_m(base)).epsilon(1e-7));

    auto spec = PotentialSpec::gen_cauchy(2, 1);
    double m = modified_target_m(spec);
    auto hat = modified_target(spec, m, 2.0);
    CHECK(radial_f(hat, m * m) == radial_f(spec, m * m));
    double s = 100.0 * m * m;
    double e = 10 * m - 2 * m;
    CHECK(radial_f(hat, s) == doctest::Approx(radial_f(spec, s) + e * e / (6144.0 * 2.0)));
    double fd = (radial_f(hat, s + 1e-4) - radial_f(hat, s - 1e-4)) / 2e-4;
    CHECK(radial_fprime(hat, s) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("three-regime lower bound") {
    LowerBoundInput in{{3.0, 0.0}, 2, 0.01, 5.0, {}};
    auto r = lower_bound_complexity(in);
    CHECK(r.value == doctest::Approx(7420.65795512883017105577900203).epsilon(1e-13));
    CHECK(r.kind == BoundKind::iters_N);
    auto r2 = lower_bound_complexity({{3.0, 0.0}, 2, 0.01, 6.0, {}});
    CHECK(std::abs(r2.value / r.value - std::numbers::e) < 1e-12);

    CHECK_THROWS_AS(lower_bound_complexity({{2.0, 2.0}, 1, 0.5, 10.0, {}}), DomainError);
    CHECK_NOTHROW(lower_bound_complexity({{2.0, 2.0}, 1, 0.49, 10.0, {}}));

    std::vector<double> lx, ly;
    for (double D : {2.0, 5.0, 20.0, 100.0, 1000.0}) {
        lx.push_back(std::log(D));
        ly.push_back(std::log(lower_bound_complexity({{1.0, 1.0}, 3, std::nullopt, D, {}}).value));
    }
    CHECK(slope(lx, ly) == doctest::Approx(0.5).epsilon(1e-12));

    auto flagged = lower_bound_complexity({{3.0, 0.0}, 2, 0.01, 5.0, 6.0});
    CHECK(flagged.infeasible);
}

TEST_CASE("delta0 thresholds") {
    auto c = PotentialSpec::gen_cauchy(1, 6);
    auto t = delta0_threshold(growth_params(c), 1, 2.0, log_normalizing_constant(c), closed_form_moment(c, 4).value);
    CHECK(t.intermediates["term1"] == doctest::Approx(5.91257101925298999552265756266).epsilon(1e-12));
    CHECK(t.intermediates["term2"] == doctest::Approx(7.21639532432449314593403934639).epsilon(1e-12));
    CHECK(t.intermediates["term3"] == 6.0);
    CHECK(t.value == doctest::Approx(7.21639532432449314593403934639).epsilon(1e-12));

    auto s = PotentialSpec::sublinear(2, 0.5);
    auto ts = delta0_threshold(growth_params(s), 2, 2.0, log_normalizing_constant(s), surrogate_pi_moment(s, 2.0));
    CHECK(ts.intermediates["term3"] == 2.0);
    CHECK(ts.value >= 2.0);

    CHECK_THROWS_AS(delta0_threshold({3.0, 0.0}, 1, 2.0, 0.0, INFINITY), MomentUndefined);

    // Above the threshold, the Gaussian start with sigma2 = e^(delta0/nu) has R_inf <= delta0.
    for (double D : {t.value, t.value + 1, t.value + 10}) {
        double s2 = sigma2_for_delta0(growth_params(c), 1, D);
        CHECK(init_divergence_bound(c, s2, InitKind::Rinf).value <= D);
    }
}

TEST_CASE("step-size upper bound") {
    auto g = PotentialSpec::gaussian(1);
    auto r = step_size_upper_bound(g, 2.0, 0.1);
    CHECK(r.value == doctest::Approx(0.9016148714068399386289032641).epsilon(1e-13));
    CHECK(!r.infeasible);
    CHECK(step_size_upper_bound(PotentialSpec::gaussian(4), 2.0, 0.1, 1.82).infeasible);
    auto twice = PotentialSpec::radial_custom(1, {[](double s) { return s; }, [](double) { return 1.0; }});
    auto r2 = step_size_upper_bound(twice, 2.0, 0.1, 1.82);
    auto r1 = step_size_upper_bound(g, 2.0, 0.1, 1.82);
    CHECK(r2.intermediates["fprime_at_sigma2_eps"] == 2 * r1.intermediates["fprime_at_sigma2_eps"]);
    CHECK(r2.value / (1 - 1 / (2 * 1.0 * 1.82)) == doctest::Approx(0.5 * r1.value / (1 - 1 / (2 * 0.5 * 1.82))));
}

TEST_CASE("initialization divergence bounds") {
    auto c = PotentialSpec::gen_cauchy(2, 2);
    InitOptions cor;
    cor.cauchy_corollary = true;
    CHECK(init_divergence_bound(c, 1.0, InitKind::Rinf, cor).value ==
          doctest::Approx(0.386294361119890618834464242916).epsilon(1e-13));
    // The general bound is attained here: sup_r ln(0.5 (1 + r^2)^2 e^(-r^2/2)) at r^2 = 3.
    CHECK(init_divergence_bound(c, 1.0, InitKind::Rinf).value ==
          doctest::Approx(0.579441541679835928251696364374).epsilon(1e-13));

    for (int d : {1, 3}) CHECK(std::abs(init_divergence_bound(PotentialSpec::gaussian(d), 1.0, InitKind::KL).value) < 1e-13);

    CHECK_THROWS_AS(init_divergence_bound(PotentialSpec::gen_cauchy(1, 2), 0.2, InitKind::Rinf), DomainError);
    CHECK_THROWS_AS(init_divergence_bound(PotentialSpec::sublinear(1, 0.5), 1.0, InitKind::Rinf), DomainError);
    CHECK_THROWS_AS(init_divergence_bound(PotentialSpec::gaussian(1), 1.0, InitKind::Rinf), DomainError);
    CHECK_THROWS_AS(init_divergence_bound(PotentialSpec::gen_cauchy(1, 2), 1.0, InitKind::R2_hat), DomainError);

    InitOptions withT;
    withT.T = 1.0;
    auto rh = init_divergence_bound(PotentialSpec::gen_cauchy(1, 2), 1.0, InitKind::R2_hat, withT);
    CHECK(rh.value == doctest::Approx(std::log(2.0) + init_divergence_bound(PotentialSpec::gen_cauchy(1, 2), 2.0,
                                                                            InitKind::Rinf).value));
    CHECK(init_divergence_bound(PotentialSpec::gaussian(2), 0.5, InitKind::R2_hat, withT).value ==
          doctest::Approx(2 * std::log(2.0)));

    auto sub = PotentialSpec::sublinear(1, 0.5);
    const double L = holder_constants(sub).L;
    auto hb = init_holder_bound(sub, 2.0, 1.0);
    CHECK(hb.value == doctest::Approx(2.0 + L + 0.5 * std::log(48.0 * L)));
    CHECK(hb.intermediates["sigma2"] == doctest::Approx(1.0 / (2 * L + 1)));
    CHECK(hb.intermediates["R_inf_modified"] > hb.value);
}
