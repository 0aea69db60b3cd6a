#include "orbits/perturb.hpp"

#include "doctest.h"
#include "helpers.hpp"
#include "orbits/errors.hpp"

#include <cmath>

using namespace orbits;
using testutil::kPi;

namespace {

SolveOptions lean_solve(int m, int grid) {
    SolveOptions o;
    o.m = m;
    o.auto_m = false;
    o.grid = grid;
    return o;
}

} // namespace

TEST_SUITE("perturb") {

TEST_CASE("cuboid perturbation assembles the documented two-mode series") {
    FourierPerturbation fp{1.25, 1.5, 1.75, 2.0};
    CHECK(fp.in_cuboid());
    FourierSeries p = fp.as_potential();
    for (double x : {0.3, 2.2, 5.0}) {
        double want = 1.25 * std::cos(x) + 1.5 * std::sin(x) +
                      1.75 * std::cos(2 * x) + 2.0 * std::sin(2 * x);
        CHECK(p.eval(x, 1.1) == doctest::Approx(want).epsilon(1e-14));
    }
    CHECK(!FourierPerturbation{0.5, 1, 1, 1}.in_cuboid());
    CHECK(!FourierPerturbation{1, 1, 2.5, 1}.in_cuboid());
}

TEST_CASE("kernel quadrature against unit-weight closed forms") {
    const double e = 0.5;
    ReducedSystem rs(testutil::flat_model(), e);
    SolveOptions opt = lean_solve(8, 32);
    std::function<double(double, double, double)> one =
        [](double, double, double) { return 1.0; };

    // constant path at x0: Int cos(x0) dtau = 2 pi cos(x0)
    FourierSeries pc({{1, 0, 1.0, 0.0}});
    for (double x0 : {0.0, 0.9, 2.4}) {
        double k = kernel_k(rs, x0, pc, opt, nullptr, &one);
        CHECK(k == doctest::Approx(2 * kPi * std::cos(x0)).epsilon(1e-9));
    }
    // an x2-dependent mode integrates to zero around the loop
    FourierSeries pmix({{1, 1, 1.0, 0.0}});
    double k0 = kernel_k(rs, 0.7, pmix, opt, nullptr, &one);
    CHECK(std::abs(k0) < 1e-9);
}

TEST_CASE("kernel weight is the negative reciprocal speed on the flat torus") {
    const double e = 0.5;
    ReducedSystem rs(testutil::flat_model(), e);
    SolveOptions opt = lean_solve(8, 32);
    FourierSeries pc({{1, 0, 1.0, 0.0}});
    KernelDiag diag;
    double k = kernel_k(rs, 1.1, pc, opt, &diag);
    double want = -2 * kPi * std::cos(1.1) / std::sqrt(2 * e);
    CHECK(k == doctest::Approx(want).epsilon(1e-9));
    CHECK(k * std::cos(1.1) < 0.0); // negative weight flips the sign
    CHECK(std::abs(diag.refinement_delta()) < 1e-8);
    CHECK(std::abs(diag.richardson - diag.fine) <= std::abs(diag.refinement_delta()) + 1e-15);
}

TEST_CASE("first-order response: residual shrinks quadratically") {
    ModelSpec model = testutil::ridge_model(0.1);
    model.perturbation = FourierPerturbation{1.0, 1.0, 1.0, 1.0}.as_potential();
    SolveOptions opt = lean_solve(12, 48);
    std::vector<double> eps = {1e-2, 5e-3, 2.5e-3};
    FirstOrderCheck fc = first_order_check(model, 1.0, 0.4, eps, opt);
    REQUIRE(fc.eps.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(fc.residual[i] < std::abs(fc.delta_f[i]) * 0.2);
        if (i > 0)
            CHECK(fc.residual[i] < fc.residual[i - 1]);
    }
    CHECK(fc.slope >= 1.9);
    CHECK(fc.slope < 2.6);
}

TEST_CASE("translation-invariant response is a pure negative gain") {
    const double e = 0.5;
    ReducedSystem rs(testutil::flat_model(), e);
    SolveOptions opt = lean_solve(8, 32);
    std::vector<double> xs = {0.0, 0.8, 1.7, 3.1, 4.6, 5.9};
    FourierResponse fr = fourier_response(rs, 1, xs, opt);
    REQUIRE(fr.u.size() == xs.size());
    double want = -2 * kPi / std::sqrt(2 * e);
    for (size_t i = 0; i < xs.size(); ++i) {
        CHECK(fr.u[i] == doctest::Approx(want).epsilon(1e-8));
        CHECK(std::abs(fr.v[i]) < 1e-8);
    }
    CHECK(fr.u_mean == doctest::Approx(want).epsilon(1e-8));
    CHECK(fr.u_rel_variation < 1e-6);
    CHECK(fr.u_mean < 0.0);
}

TEST_CASE("quartic oscillation bound holds on curved profiles, fails on flat") {
    ReducedSystem rs(testutil::ridge_model(0.1), 1.0);
    SolveOptions opt = lean_solve(12, 96);
    ActionProfile prof = action_profile(rs, opt);

    OscResult near_max = osc_criterion(prof, kPi - 0.25, kPi + 0.25);
    CHECK(near_max.holds);
    CHECK(near_max.osc > 0.0);
    CHECK(near_max.bound > 0.0);

    OscResult forced_fail = osc_criterion(prof, kPi - 0.25, kPi + 0.25, 10.0);
    CHECK(forced_fail.m_const == doctest::Approx(10.0));
    CHECK(!forced_fail.holds);

    ReducedSystem flat(testutil::flat_model(), 0.5);
    ActionProfile fp = action_profile(flat, lean_solve(8, 64));
    OscResult degenerate = osc_criterion(fp, 1.0, 2.0);
    CHECK(degenerate.osc < 1e-9);
}

TEST_CASE("Monte Carlo nondegeneracy study is deterministic and monotone") {
    ModelSpec base = testutil::flat_model();
    ContinuationOptions copt;
    copt.e_start = 0.5;
    copt.e_end = 0.54;
    copt.de = 0.02;
    copt.audit_every = 10;
    copt.solve = lean_solve(8, 48);

    MonteCarloReport rep = monte_carlo_nondegeneracy(base, 1e-2, 12, 2024, copt);
    CHECK(rep.n == 12);
    CHECK(rep.seed == 2024);
    REQUIRE(rep.samples.size() == 12);
    for (const auto& s : rep.samples) {
        for (double pval : s.params) {
            CHECK(pval >= 1.0);
            CHECK(pval <= 2.0);
        }
    }
    CHECK(rep.passed == 12);
    CHECK(rep.fraction == doctest::Approx(1.0));
    CHECK(rep.ci_lo > 0.7);
    CHECK(rep.ci_hi == doctest::Approx(1.0));

    // byte-level determinism of a rerun
    MonteCarloReport rerun = monte_carlo_nondegeneracy(base, 1e-2, 12, 2024, copt);
    for (int i = 0; i < 12; ++i) {
        CHECK(rerun.samples[i].min_lambda_ratio == rep.samples[i].min_lambda_ratio);
        for (int k = 0; k < 4; ++k)
            CHECK(rerun.samples[i].params[k] == rep.samples[i].params[k]);
    }

    // a different seed draws different parameters
    MonteCarloReport other = monte_carlo_nondegeneracy(base, 1e-2, 2, 77, copt);
    CHECK(other.samples[0].params[0] != rep.samples[0].params[0]);

    // threshold monotonicity from stored ratios
    double f1 = rep.fraction_at(1e-8);
    double f2 = rep.fraction_at(1e-4);
    double f3 = rep.fraction_at(1e2);
    CHECK(f1 >= f2);
    CHECK(f2 >= f3);
    CHECK(f3 == doctest::Approx(0.0));
}

} // TEST_SUITE
