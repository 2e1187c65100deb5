#include <doctest.h>

#include <cmath>
#include <sstream>

#include "heavytail/sampler.hpp"

using namespace heavytail;

TEST_CASE("gaussian initialization") {
    auto b = gaussian_init(1.0, 2, 100000, 5);
    auto m = second_moment(b);
    CHECK(std::abs(m.m2 - 2.0) < 4 * m.se);
    auto b2 = gaussian_init(4.0, 3, 100000, 6);
    auto m2 = second_moment(b2);
    CHECK(std::abs(m2.m2 - 12.0) < 4 * m2.se);
    CHECK(gaussian_init(4.0, 3, 1000, 6).positions == gaussian_init(4.0, 3, 1000, 6).positions);
}

TEST_CASE("one LMC step on the Gaussian target follows the exact recursion") {
    auto spec = PotentialSpec::gaussian(2);
    auto b = gaussian_init(2.0, 2, 200000, 21, 0.1);
    auto before = second_moment(b);
    lmc_step(b, spec);
    auto after = second_moment(b);
    CHECK(b.k == 1);
    CHECK(std::abs(after.m2 - 3.64) < 4 * std::hypot(after.se, 0.81 * before.se));
}

TEST_CASE("vanishing step leaves the chains in place") {
    auto spec = PotentialSpec::gen_cauchy(2, 1);
    auto b = gaussian_init(1.0, 2, 1000, 3, 1e-14);
    auto x0 = b.positions;
    lmc_step(b, spec);
    for (std::size_t i = 0; i < x0.size(); ++i) CHECK(std::abs(b.positions[i] - x0[i]) < 1e-5);
}

TEST_CASE("one-step second-moment inequality for every family") {
    for (auto spec : {PotentialSpec::gaussian(3), PotentialSpec::sublinear(3, 0.5), PotentialSpec::gen_cauchy(3, 2)}) {
        auto g = growth_params(spec);
        auto b = gaussian_init(9.0, 3, 100000, 17, 0.05);
        auto m0 = second_moment(b);
        lmc_step(b, spec);
        auto m1 = second_moment(b);
        double rhs = m0.m2 - 2 * g.b * b.h * std::pow(m0.m2, g.alpha_growth / 2) + 2 * b.h * 3;
        CHECK(m1.m2 >= rhs - 4 * std::hypot(m0.se, m1.se));
    }
}

TEST_CASE("run_chains records k = 0 and follows the Gaussian fixed point") {
    auto spec = PotentialSpec::gaussian(1);
    auto b = gaussian_init(100.0, 1, 100000, 8, 0.1);
    auto t0 = run_chains(spec, b, 0, 1);
    CHECK(t0.iters.size() == 1);
    auto tr = run_chains(spec, b, 200, 10);
    CHECK(tr.iters.front() == 0);
    CHECK(tr.iters.back() == 200);
    double fixed = 0.2 / (1.0 - 0.81);
    CHECK(std::abs(tr.m2.back() - fixed) < 4 * tr.se.back());
    // Exact recursion m_{k+1} = 0.81 m_k + 0.2 from the empirical start.
    double m = tr.m2.front();
    std::size_t r = 1;
    for (std::uint64_t k = 1; k <= 200; ++k) {
        m = 0.81 * m + 0.2;
        if (r < tr.iters.size() && tr.iters[r] == k) {
            CHECK(std::abs(tr.m2[r] - m) < 4 * std::hypot(tr.se[r], tr.se[0] * std::pow(0.81, k)));
            ++r;
        }
    }
}

TEST_CASE("generalized Cauchy chains settle at the target second moment") {
    auto spec = PotentialSpec::gen_cauchy(1, 3);
    auto b = gaussian_init(1.0, 1, 5000, 31, 0.01);
    auto tr = run_chains(spec, b, 10000, 1000);
    CHECK(std::abs(tr.m2.back() - 1.0) < 4 * tr.se.back());
}

TEST_CASE("divergence is reported with a partial trace") {
    auto spec = PotentialSpec::gaussian(1);
    auto b = gaussian_init(1.0, 1, 100, 2, 3.0);
    try {
        run_chains(spec, b, 2000, 10);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.iter > 100);
        CHECK(!e.partial.iters.empty());
        CHECK(e.partial.iters.back() < e.iter);
    }
}

TEST_CASE("traces are reproducible and export to CSV") {
    auto spec = PotentialSpec::sublinear(2, 0.5);
    auto a = gaussian_init(4.0, 2, 3000, 44, 0.01);
    auto b = a;
    auto ta = run_chains(spec, a, 500, 50);
    auto tb = run_chains(spec, b, 500, 50);
    std::ostringstream sa, sb;
    write_trace_csv(ta, sa);
    write_trace_csv(tb, sb);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().rfind("iter,m2,se,n_chains\n", 0) == 0);
    // Splitting the run must not change anything.
    auto c = gaussian_init(4.0, 2, 3000, 44, 0.01);
    run_chains(spec, c, 200, 50);
    auto tc = run_chains(spec, c, 300, 50);
    CHECK(tc.m2.back() == ta.m2.back());
}

TEST_CASE("reference diffusion") {
    auto g = PotentialSpec::gaussian(2);
    auto init = gaussian_init(1.0, 2, 20000, 77);
    auto tr = reference_diffusion(g, init, 2.0, 100, 0.5);
    for (std::size_t i = 0; i < tr.m2.size(); ++i) CHECK(std::abs(tr.m2[i] - 2.0) < 4 * tr.se[i]);
    CHECK(!tr.warning);

    auto t0 = reference_diffusion(g, init, 0.0, 200);
    CHECK(t0.m2.size() == 1);
    CHECK(t0.m2[0] == doctest::Approx(second_moment(init).m2).epsilon(1e-13));

    auto s = PotentialSpec::sublinear(2, 0.5);
    auto gp = growth_params(s);
    auto far = gaussian_init(50.0, 2, 10000, 78);
    auto ts = reference_diffusion(s, far, 4.0, 100, 0.25);
    for (std::size_t i = 1; i < ts.m2.size(); ++i) {
        double dt = (ts.iters[i] - ts.iters[i - 1]) * ts.h;
        double slope = (ts.m2[i] - ts.m2[i - 1]) / dt;
        double bound = 2 * 2 - 2 * gp.b * std::pow(ts.m2[i - 1], gp.alpha_growth / 2);
        CHECK(slope >= bound - 4 * std::hypot(ts.se[i], ts.se[i - 1]) / dt);
    }
}
