// Acceptance gate for the artifact: one line per criterion, pass/fail, with
// the measured quantities inline. Exit 0 iff every criterion passes.

#include "helpers.hpp"

#include "orbits/classify.hpp"
#include "orbits/continuation.hpp"
#include "orbits/errors.hpp"
#include "orbits/flow.hpp"
#include "orbits/json_io.hpp"
#include "orbits/perturb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

using namespace orbits;

namespace {

constexpr double kPi = testutil::kPi;

int g_failed = 0;

void report(int idx, const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] %d. %s: %s\n", ok ? "PASS" : "FAIL", idx, name,
                detail.c_str());
    std::fflush(stdout);
    if (!ok)
        ++g_failed;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double angdist(double a, double b) {
    double d = std::fmod(std::abs(a - b), 2.0 * kPi);
    return std::min(d, 2.0 * kPi - d);
}

// Twist tally across every record the gate accepts (criterion 4).
long g_arcs = 0, g_arcs_neg_b = 0;

void tally_twist(const ReducedSystem& rs, const MinimizerRecord& rec,
                 SolveOptions opt) {
    opt.auto_m = false;
    opt.m = rec.config.m;
    InnerSolveResult s = inner_solve(rs, rec.x_star, opt, &rec.config);
    for (const SubArcResult& a : s.arcs) {
        ++g_arcs;
        if (a.d_xxp < 0.0)
            ++g_arcs_neg_b;
    }
}

SolveOptions lean_options() {
    SolveOptions opt;
    opt.m = 16;
    opt.auto_m = false;
    opt.grid = 96;
    opt.monodromy.steps = 2048;
    return opt;
}

void crit1_random_equivalence() {
    auto t0 = std::chrono::steady_clock::now();
    const int n_models = 100;
    int solved = 0, records = 0, disagreements = 0, failures = 0;
    std::string first_failure;
    SolveOptions opt = lean_options();
    for (int seed = 1; seed <= n_models; ++seed) {
        try {
            ModelSpec model = testutil::random_model(seed);
            ReducedSystem rs(model, 1.0);
            FindMinimaResult fm = find_minima(rs, opt);
            for (const MinimizerRecord& rec : fm.minima) {
                ++records;
                try {
                    classify_equivalence(rec, opt);
                } catch (const OrbitsError& e) {
                    if (e.code() == Err::CriterionDisagreement)
                        ++disagreements;
                    else
                        throw;
                }
                tally_twist(rs, rec, opt);
            }
            ++solved;
        } catch (const std::exception& e) {
            ++failures;
            if (first_failure.empty())
                first_failure = fmt("seed %d: %s", seed, e.what());
        }
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    bool ok = solved == n_models && disagreements == 0 && secs < 600.0;
    std::string detail =
        fmt("%d/%d models solved, %d global minimizers, %d disagreements, %.1fs",
            solved, n_models, records, disagreements, secs);
    if (!first_failure.empty())
        detail += "; first failure " + first_failure;
    report(1, "Hessian vs monodromy equivalence on 100 random models", ok,
           detail);
}

void crit2_ridge_oracle() {
    const double eps0 = 0.1;
    ReducedSystem rs(testutil::ridge_model(eps0), 1.0);
    SolveOptions opt = lean_options();
    opt.monodromy.steps = 4096;
    FindMinimaResult fm = find_minima(rs, opt);
    if (fm.minima.size() != 1) {
        report(2, "analytic ridge oracle", false,
               fmt("expected 1 global minimizer, got %zu", fm.minima.size()));
        return;
    }
    const MinimizerRecord& rec = fm.minima[0];
    tally_twist(rs, rec, opt);

    double dist = angdist(rec.x_star, 0.0);
    double t_period = rec.period;
    double mu = std::exp(std::sqrt(eps0) * t_period);
    double lam_max = 0.0, lam_min = 1e300;
    for (const std::complex<double>& z : rec.monodromy.transverse) {
        lam_max = std::max(lam_max, std::abs(z));
        lam_min = std::min(lam_min, std::abs(z));
    }
    double rel_plus = std::abs(lam_max - mu) / mu;
    double rel_minus = std::abs(lam_min - 1.0 / mu) * mu;
    bool ground_pos = rec.ground_positive;
    bool ok = dist < 1e-6 && rel_plus < 0.05 && rel_minus < 0.05 &&
              rec.lambda0 > 0.0 && ground_pos &&
              rec.verdict == OrbitVerdict::Hyperbolic;
    report(2, "analytic ridge oracle (x*, multipliers, lambda0, xi0)", ok,
           fmt("|x*|=%.2e, mult rel err %.2e/%.2e vs exp(+-sqrt(eps0)T), "
               "lambda0=%.3e, ground %s",
               dist, rel_plus, rel_minus, rec.lambda0,
               ground_pos ? "positive" : "NOT positive"));
}

void crit3_flat_degenerate() {
    ReducedSystem rs(testutil::flat_model(), 0.5);
    SolveOptions opt = lean_options();
    FindMinimaResult fm = find_minima(rs, opt);
    if (fm.minima.size() != 1) {
        report(3, "flat torus degenerate family", false,
               fmt("expected 1 family record, got %zu", fm.minima.size()));
        return;
    }
    const MinimizerRecord& rec = fm.minima[0];
    tally_twist(rs, rec, opt);
    double osc = fm.profile.oscillation();
    double worst_mult = 0.0;
    for (const std::complex<double>& z : rec.monodromy.multipliers)
        worst_mult = std::max(worst_mult, std::abs(z - 1.0));
    bool ok = osc < 1e-10 && std::abs(rec.lambda0) < 1e-8 &&
              worst_mult < 1e-6 && rec.verdict == OrbitVerdict::Degenerate &&
              rec.degenerate_family;
    report(3, "flat torus: constant profile, unit multipliers, degenerate", ok,
           fmt("osc=%.2e, lambda0=%.2e, max|mult-1|=%.2e", osc, rec.lambda0,
               worst_mult));
}

void crit4_twist_tally() {
    bool ok = g_arcs > 0 && g_arcs_neg_b == g_arcs;
    report(4, "twist invariant B_i < 0 on accepted sub-arcs", ok,
           fmt("%ld/%ld arcs with B_i < 0", g_arcs_neg_b, g_arcs));
}

void crit5_first_order_kernel() {
    ModelSpec model = testutil::ridge_model(0.1);
    FourierPerturbation p{1.3, 1.7, 1.1, 1.9};
    model.perturbation = p.as_potential();
    model.cutoff = 2;
    SolveOptions opt;
    opt.m = 12;
    opt.auto_m = false;
    opt.grid = 48;
    FirstOrderCheck fo =
        first_order_check(model, 1.0, 0.4, {1e-2, 5e-3, 2.5e-3}, opt);
    bool ok = fo.slope >= 1.9;
    report(5, "first-order kernel: remainder slope >= 1.9", ok,
           fmt("slope=%.3f, residuals %.2e/%.2e/%.2e", fo.slope, fo.residual[0],
               fo.residual[1], fo.residual[2]));
}

void crit6_corner_bound() {
    const std::vector<double> offsets = {0.04, 0.02, 0.01, 0.005};
    SolveOptions opt = lean_options();
    std::string detail;
    bool ok = true;
    const char* names[2] = {"ridge", "cos2"};
    ModelSpec models[2] = {testutil::ridge_model(0.1), testutil::cos2_model(0.08)};
    for (int i = 0; i < 2; ++i) {
        ReducedSystem rs(models[i], 1.0);
        FindMinimaResult fm = find_minima(rs, opt);
        if (fm.minima.empty()) {
            ok = false;
            detail += fmt("%s: no minimum; ", names[i]);
            continue;
        }
        CornerFit fit = corner_probe(rs, fm.minima[0], offsets, opt);
        ok = ok && fit.exponent >= 0.45 && fit.theta > 0.0;
        detail += fmt("%s exponent=%.3f theta=%.3f; ", names[i], fit.exponent,
                      fit.theta);
    }
    report(6, "corner bound: corner ~ theta * gap^(1/2)", ok, detail);
}

void crit7_two_ridge_structure() {
    ContinuationOptions co;
    co.e_start = 0.6;
    co.e_end = 1.2;
    co.de = 0.02;
    co.solve = lean_options();
    co.solve.grid = 128;
    GlobalStructure gs;
    try {
        gs = global_structure(testutil::two_ridge_model(), co);
    } catch (const std::exception& e) {
        report(7, "two-ridge sweep structure", false,
               fmt("sweep failed: %s", e.what()));
        return;
    }
    bool one_crossing = gs.crossings.size() == 1;
    bool both_hyp = false;
    double gap = 0.0, e_star = 0.0;
    if (one_crossing) {
        const CrossingEvent& c = gs.crossings[0];
        both_hyp = c.hyperbolic_a && c.hyperbolic_b;
        gap = std::abs(c.slope_gap());
        e_star = c.e_star;
    }
    int multi_rows = 0;
    for (const SummaryRow& row : gs.summary)
        if (row.n_global_minima != 1)
            ++multi_rows;
    bool ok = one_crossing && both_hyp && gap > 1e-6 && multi_rows == 0;
    report(7, "two-ridge sweep: one crossing, hyperbolic pair, slope gap", ok,
           fmt("crossings=%zu, e*=%.4f, both hyperbolic=%d, |slope gap|=%.3e, "
               "rows with >1 global: %d",
               gs.crossings.size(), e_star, (int)both_hyp, gap, multi_rows));
}

void crit8_monte_carlo() {
    ContinuationOptions co;
    co.e_start = 0.5;
    co.e_end = 0.54;
    co.de = 0.02;
    co.audit_every = 2;
    co.solve.m = 8;
    co.solve.auto_m = false;
    co.solve.grid = 32;
    const std::uint64_t seed = 20240817ull;
    MonteCarloReport a =
        monte_carlo_nondegeneracy(testutil::flat_model(), 1e-2, 200, seed, co);
    MonteCarloReport b =
        monte_carlo_nondegeneracy(testutil::flat_model(), 1e-2, 200, seed, co);
    bool identical = monte_carlo_to_json(a) == monte_carlo_to_json(b);
    bool ci_ok = a.ci_lo <= a.fraction && a.fraction <= a.ci_hi &&
                 a.ci_lo >= 0.0 && a.ci_hi <= 1.0;
    double thresholds[4] = {1e-9, 1e-6, 1e-3, 1e-1};
    bool monotone = true;
    for (int i = 0; i + 1 < 4; ++i)
        if (a.fraction_at(thresholds[i]) < a.fraction_at(thresholds[i + 1]))
            monotone = false;
    bool ok = identical && ci_ok && monotone && a.n == 200;
    report(8, "Monte-Carlo nondegeneracy: deterministic, CI, monotone", ok,
           fmt("fraction=%.3f, CI=[%.3f, %.3f], rerun identical=%d, "
               "threshold-monotone=%d",
               a.fraction, a.ci_lo, a.ci_hi, (int)identical, (int)monotone));
}

void crit9_hygiene() {
    std::string detail;
    bool ok = true;

    // Legendre roundtrip on a random model.
    {
        ModelSpec model = testutil::random_model(7);
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        double worst = 0.0;
        for (int i = 0; i < 200; ++i) {
            Vec2 x{u(rng), u(rng)}, v{u(rng), u(rng)};
            Vec2 back = model.to_velocity(x, model.to_momentum(x, v));
            worst = std::max({worst, std::abs(back[0] - v[0]),
                              std::abs(back[1] - v[1])});
        }
        ok = ok && worst < 1e-10;
        detail += fmt("legendre=%.1e ", worst);
    }

    // Energy drift over one period of a generic trajectory.
    {
        ModelSpec model = testutil::ridge_model(0.1);
        double e = 1.0;
        double speed = std::sqrt(2.0 * (e - model.potential_value({0.3, 0.0})));
        Trajectory traj =
            integrate_el(model, {{0.3, 0.0}, {0.0, speed}}, 2.0 * kPi, 4096);
        ok = ok && traj.energy_drift < 1e-8;
        detail += fmt("drift=%.1e ", traj.energy_drift);
    }

    // det(monodromy) = 1 on the ridge orbit.
    {
        ReducedSystem rs(testutil::ridge_model(0.1), 1.0);
        SolveOptions opt = lean_options();
        FindMinimaResult fm = find_minima(rs, opt);
        double dd = fm.minima.empty()
                        ? 1e300
                        : std::abs(fm.minima[0].monodromy.det - 1.0);
        ok = ok && dd < 1e-8;
        detail += fmt("|det-1|=%.1e ", dd);
    }

    // Jacobi entries against finite differences of the residual.
    {
        ReducedSystem rs(testutil::two_ridge_model(), 1.0);
        const int m = 8;
        Configuration cfg;
        cfg.m = m;
        for (int i = 0; i < m; ++i)
            cfg.nodes.push_back(0.3 + 0.15 * std::sin(2.0 * kPi * i / m));
        SubArcOptions sopt;
        TotalAction base = total_action(rs, cfg, sopt);
        JacobiMatrix jac = assemble_jacobi(base.arcs);
        double scale = 1.0, worst = 0.0;
        for (int i = 0; i < m; ++i)
            scale = std::max({scale, std::abs(jac.diag[i]), std::abs(jac.off[i])});
        const double h = 1e-5;
        for (int k = 0; k < m; ++k) {
            Configuration up = cfg, dn = cfg;
            up.nodes[k] += h;
            dn.nodes[k] -= h;
            TotalAction tu = total_action(rs, up, sopt);
            TotalAction td = total_action(rs, dn, sopt);
            for (int i = 0; i < m; ++i) {
                double fd = (tu.residual[i] - td.residual[i]) / (2.0 * h);
                double entry = 0.0;
                if (i == k)
                    entry = jac.diag[i];
                else if ((k - i + m) % m == 1)
                    entry = jac.off[i];
                else if ((i - k + m) % m == 1)
                    entry = jac.off[k];
                worst = std::max(worst, std::abs(fd - entry) / scale);
            }
        }
        ok = ok && worst < 1e-5;
        detail += fmt("jacobi_fd=%.1e ", worst);
    }

    // m -> 2m refinement of the action at a wavy minimizer.
    {
        ReducedSystem rs(testutil::two_ridge_model(), 0.8);
        SolveOptions opt = lean_options();
        FindMinimaResult fm = find_minima(rs, opt);
        double diff = 1e300;
        if (!fm.minima.empty()) {
            SolveOptions o16 = opt, o32 = opt;
            o16.m = 16;
            o32.m = 32;
            double f16 = action_of_base(rs, fm.minima[0].x_star, o16).value;
            double f32 = action_of_base(rs, fm.minima[0].x_star, o32).value;
            diff = std::abs(f32 - f16);
        }
        ok = ok && diff < 1e-6;
        detail += fmt("refine=%.1e", diff);
    }

    report(9, "numerical hygiene bundle", ok, detail);
}

} // namespace

int main() {
    std::printf("orbits acceptance gate\n");
    crit1_random_equivalence();
    crit2_ridge_oracle();
    crit3_flat_degenerate();
    crit4_twist_tally();
    crit5_first_order_kernel();
    crit6_corner_bound();
    crit7_two_ridge_structure();
    crit8_monte_carlo();
    crit9_hygiene();
    std::printf("%d/9 criteria passed\n", 9 - g_failed);
    return g_failed == 0 ? 0 : 1;
}
