#include "orbits/classify.hpp"

#include "doctest.h"
#include "helpers.hpp"
#include "orbits/errors.hpp"

#include <cmath>

using namespace orbits;
using testutil::kPi;

namespace {

SolveOptions quick_opts(int m, int grid) {
    SolveOptions o;
    o.m = m;
    o.auto_m = false;
    o.grid = grid;
    return o;
}

} // namespace

TEST_SUITE("classify") {

TEST_CASE("flat torus: translation family, zero lowest mode, unit multipliers") {
    ReducedSystem rs(testutil::flat_model(), 0.5);
    FindMinimaResult r = find_minima(rs, quick_opts(8, 64));
    CHECK(r.profile.oscillation() < 1e-8);
    REQUIRE(r.minima.size() == 1);
    const MinimizerRecord& rec = r.minima[0];
    CHECK(rec.degenerate_family);
    CHECK(rec.verdict == OrbitVerdict::Degenerate);
    CHECK(std::abs(rec.lambda0) < 1e-8);
    CHECK(rec.lambda1 > 1e-3);
    CHECK(rec.period == doctest::Approx(2 * kPi).epsilon(1e-9)); // 2*pi/sqrt(2E), E=1/2
    CHECK(rec.twist_ok);
    for (const auto& lam : rec.monodromy.multipliers)
        CHECK(std::abs(lam) == doctest::Approx(1.0).epsilon(1e-6));
    EquivalenceReport rep = classify_equivalence(rec, quick_opts(8, 64));
    CHECK(rep.agree);
    CHECK(!rep.variational_nondegenerate);
    CHECK(!rep.monodromy_hyperbolic);
}

TEST_CASE("single ridge: isolated hyperbolic minimizer on the crest") {
    const double e = 1.0, eps0 = 0.1;
    ReducedSystem rs(testutil::ridge_model(eps0), e);
    SolveOptions opt = quick_opts(16, 128);
    FindMinimaResult r = find_minima(rs, opt);
    REQUIRE(r.minima.size() == 1);
    const MinimizerRecord& rec = r.minima[0];

    double dist = std::min(rec.x_star, 2 * kPi - rec.x_star);
    CHECK(dist < 1e-6);
    CHECK(rec.action == doctest::Approx(2 * kPi * std::sqrt(2 * (e - eps0))).epsilon(1e-8));
    CHECK(rec.residual < 1e-9);
    CHECK(rec.lambda0 > 0.0);
    CHECK(rec.lambda0 > 1e-6 * rec.lambda1);
    CHECK(rec.ground_positive);
    CHECK(rec.twist_ok);
    CHECK(rec.interior_pd);
    CHECK(rec.hessian_f > 0.0);
    CHECK(rec.verdict == OrbitVerdict::Hyperbolic);

    double t = 2 * kPi / std::sqrt(2 * (e - eps0));
    CHECK(rec.period == doctest::Approx(t).epsilon(1e-8));
    // transverse linearization on the crest has constant curvature eps0
    double want = std::exp(std::sqrt(eps0) * t);
    CHECK(rec.monodromy.max_transverse_modulus == doctest::Approx(want).epsilon(1e-5));
    CHECK(std::abs(rec.monodromy.det - 1.0) < 1e-8);
    CHECK(rec.monodromy.trivial_defect < 1e-6);

    EquivalenceReport rep = classify_equivalence(rec, opt);
    CHECK(rep.agree);
    CHECK(rep.variational_nondegenerate);
    CHECK(rep.monodromy_hyperbolic);
}

TEST_CASE("two crests of cos(2 x1): symmetric global tie") {
    ReducedSystem rs(testutil::cos2_model(0.08), 1.0);
    FindMinimaResult r = find_minima(rs, quick_opts(16, 128));
    REQUIRE(r.minima.size() == 2);
    // action 2*pi*sqrt(2(E - U)) is least on the crests of U: x1 = 0 and pi
    double a = std::min(r.minima[0].x_star, r.minima[1].x_star);
    double b = std::max(r.minima[0].x_star, r.minima[1].x_star);
    CHECK(std::min(a, 2 * kPi - a) < 1e-6);
    CHECK(b == doctest::Approx(kPi).epsilon(1e-6));
    CHECK(r.minima[0].action == doctest::Approx(r.minima[1].action).epsilon(1e-9));
    for (const auto& rec : r.minima) {
        CHECK(rec.is_global);
        CHECK(rec.lambda0 > 0.0);
        CHECK(rec.verdict == OrbitVerdict::Hyperbolic);
    }
}

TEST_CASE("action profile is everywhere valid and reflection symmetric") {
    ReducedSystem rs(testutil::ridge_model(0.1), 1.0);
    SolveOptions opt = quick_opts(12, 96);
    ActionProfile p = action_profile(rs, opt);
    int n = (int)p.x0.size();
    REQUIRE(n == 96);
    for (int j = 0; j < n; ++j)
        CHECK(p.valid[j]);
    // U(-x) = U(x) makes the profile even
    for (int j = 1; j < n / 2; ++j)
        CHECK(p.value[j] == doctest::Approx(p.value[n - j]).epsilon(1e-7));
    CHECK(!p.smooth_windows.empty());
    // the argmin sits at the crest
    int best = 0;
    for (int j = 0; j < n; ++j)
        if (p.value[j] < p.value[best])
            best = j;
    CHECK((best == 0 || best == n - 1));
}

TEST_CASE("base-point gradient brackets the minimizer") {
    ReducedSystem rs(testutil::ridge_model(0.1), 1.0);
    SolveOptions opt = quick_opts(12, 64);
    InnerSolveResult right = inner_solve(rs, 0.3, opt);
    InnerSolveResult left = inner_solve(rs, 2 * kPi - 0.3, opt);
    CHECK(right.base_residual > 0.0);
    CHECK(left.base_residual < 0.0);
    CHECK(right.value == doctest::Approx(left.value).epsilon(1e-7));
    CHECK(action_of_base(rs, 0.3, opt).value == doctest::Approx(right.value).epsilon(1e-12));
}

TEST_CASE("constrained minimizers develop a square-root corner law") {
    ReducedSystem rs(testutil::ridge_model(0.1), 1.0);
    SolveOptions opt = quick_opts(16, 64);
    FindMinimaResult r = find_minima(rs, opt);
    REQUIRE(r.minima.size() == 1);
    std::vector<double> offsets = {0.04, 0.02, 0.01, 0.005};
    CornerFit fit = corner_probe(rs, r.minima[0], offsets, opt);
    REQUIRE(fit.offsets.size() == 4);
    for (size_t i = 0; i < 4; ++i) {
        CHECK(fit.gaps[i] > 0.0);
        CHECK(fit.corners[i] > 0.0);
        if (i > 0) {
            CHECK(fit.gaps[i] < fit.gaps[i - 1]);
            CHECK(fit.corners[i] < fit.corners[i - 1]);
        }
    }
    CHECK(fit.exponent > 0.45);
    CHECK(fit.exponent < 0.55);
    CHECK(fit.theta > 0.0);
}

TEST_CASE("slice refinement stabilizes immediately on smooth minimizers") {
    ReducedSystem rs(testutil::ridge_model(0.1), 1.0);
    SolveOptions opt = quick_opts(4, 64);
    opt.m_max = 64;
    int m = choose_m(rs, opt);
    CHECK(m == 4);
    // the pinned refinement criterion: doubling m moves the action < 1e-6
    SolveOptions o4 = quick_opts(4, 64), o8 = quick_opts(8, 64);
    double f4 = inner_solve(rs, 0.9, o4).value;
    double f8 = inner_solve(rs, 0.9, o8).value;
    CHECK(std::abs(f8 - f4) < 1e-6 * (1 + std::abs(f4)));
}

TEST_CASE("certificate disagreement is a hard error both ways") {
    SolveOptions opt;
    MinimizerRecord rec;
    rec.x_star = 1.0;
    rec.lambda0 = 0.5;
    rec.lambda1 = 1.0;
    rec.twist_ok = true;
    rec.monodromy.verdict = StabilityVerdict::NonHyperbolic;
    rec.monodromy.max_transverse_modulus = 1.0;
    try {
        classify_equivalence(rec, opt);
        FAIL("expected CriterionDisagreement");
    } catch (const OrbitsError& e) {
        CHECK(e.code() == Err::CriterionDisagreement);
    }
    rec.lambda0 = 0.0; // degenerate spectrum but hyperbolic multipliers
    rec.monodromy.verdict = StabilityVerdict::Hyperbolic;
    rec.monodromy.max_transverse_modulus = 3.0;
    try {
        classify_equivalence(rec, opt);
        FAIL("expected CriterionDisagreement");
    } catch (const OrbitsError& e) {
        CHECK(e.code() == Err::CriterionDisagreement);
    }
}

} // TEST_SUITE
