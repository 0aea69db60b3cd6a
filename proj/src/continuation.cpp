#include "orbits/continuation.hpp"

#include "orbits/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace orbits {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double ang_dist(double a, double b) {
    double d = std::fmod(std::abs(a - b), kTwoPi);
    return std::min(d, kTwoPi - d);
}

// Tracks the branch minimizer at a fixed energy: scalar damped Newton on the
// base-point gradient, warm-started from a nearby solution.
InnerSolveResult track_minimum(const ModelSpec& model, double e, double xstart,
                               const SolveOptions& so, const Configuration* init,
                               const std::vector<double>* warm) {
    ReducedSystem rs(model, e);
    InnerSolveResult s = inner_solve(rs, xstart, so, init, warm);
    double x = xstart;
    for (int it = 0; it < 50; ++it) {
        double g = s.base_residual;
        if (std::abs(g) < so.newton_tol)
            return s;
        double hess;
        try {
            hess = jacobi_schur_complement(assemble_jacobi(s.arcs));
        } catch (const OrbitsError&) {
            hess = 0.0;
        }
        if (!(hess > 1e-10)) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "branch direction is flat at E=%.6f, x=%.6f", e, x);
            raise(Err::StepFailure, buf);
        }
        double dx = std::clamp(-g / hess, -0.2, 0.2);
        bool ok = false;
        for (int half = 0; half < 8 && !ok; ++half) {
            try {
                InnerSolveResult t = inner_solve(rs, x + dx, so, &s.config, &s.warm_y);
                if (std::abs(t.base_residual) < std::abs(g) * 0.9 ||
                    std::abs(t.base_residual) < so.newton_tol) {
                    s = std::move(t);
                    x += dx;
                    ok = true;
                }
            } catch (const OrbitsError&) {
            }
            if (!ok)
                dx *= 0.5;
        }
        if (!ok) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "branch tracking stalled at E=%.6f, x=%.6f, |dF/dx0|=%.3e",
                          e, x, std::abs(g));
            raise(Err::StepFailure, buf);
        }
    }
    if (std::abs(s.base_residual) >= so.newton_tol)
        raise(Err::StepFailure, "branch tracking did not converge");
    return s;
}

struct LiveBranch {
    Branch br;
    Configuration cfg;
    std::vector<double> warm;
    double x = 0.0;
    double action = 0.0;
    double lambda0 = 0.0, lambda1 = 0.0;
    double df_de = 0.0;
    bool alive = true;
    // state at the previous grid energy, kept for crossing bisection
    Configuration prev_cfg;
    std::vector<double> prev_warm;
    double prev_x = 0.0;
    double prev_action = 0.0;

    void absorb(const ModelSpec&, double e, InnerSolveResult&& s) {
        JacobiSpectrum spec = jacobi_spectrum(assemble_jacobi(s.arcs));
        x = s.config.nodes[0];
        action = s.value;
        lambda0 = spec.lambda0;
        lambda1 = spec.lambda1;
        df_de = s.df_de;
        cfg = std::move(s.config);
        warm = std::move(s.warm_y);
        BranchPoint pt;
        pt.e = e;
        pt.x_star = std::fmod(x, kTwoPi) < 0 ? std::fmod(x, kTwoPi) + kTwoPi
                                             : std::fmod(x, kTwoPi);
        pt.action = action;
        pt.lambda0 = lambda0;
        pt.lambda1 = lambda1;
        pt.df_de = df_de;
        br.points.push_back(pt);
    }
};

// Advances a branch from e_prev to e_target, halving the internal step on
// failure down to de_min. Returns false (and sets end_reason) when the
// branch cannot be continued.
bool advance_branch(const ModelSpec& model, LiveBranch& lb, double e_prev,
                    double e_target, const ContinuationOptions& opt,
                    const SolveOptions& so) {
    lb.prev_cfg = lb.cfg;
    lb.prev_warm = lb.warm;
    lb.prev_x = lb.x;
    lb.prev_action = lb.action;

    double e = e_prev;
    double h = e_target - e_prev;
    Configuration cfg = lb.cfg;
    std::vector<double> warm = lb.warm;
    double x = lb.x;
    InnerSolveResult s;
    bool have = false;
    while (e < e_target - 1e-15) {
        double step = std::min(h, e_target - e);
        try {
            s = track_minimum(model, e + step, x, so, &cfg,
                              warm.empty() ? nullptr : &warm);
            e += step;
            x = s.config.nodes[0];
            cfg = s.config;
            warm = s.warm_y;
            have = true;
        } catch (const OrbitsError&) {
            h *= 0.5;
            if (h < opt.de_min) {
                lb.alive = false;
                lb.br.end_reason = "step-failure";
                return false;
            }
        }
    }
    if (!have)
        return true; // zero-length step
    lb.absorb(model, e_target, std::move(s));
    if (!(lb.lambda0 > so.degeneracy_threshold * lb.lambda1)) {
        lb.alive = false;
        lb.br.end_reason = "degenerate";
        return false;
    }
    return true;
}

} // namespace

Branch continue_branch(const ModelSpec& model, const MinimizerRecord& seed,
                       const ContinuationOptions& opt, int id) {
    if (!(opt.e_end > opt.e_start))
        raise(Err::Config, "continuation requires e_end > e_start");
    SolveOptions so = opt.solve;
    so.auto_m = false;
    so.m = seed.config.m;

    LiveBranch lb;
    lb.br.id = id;
    lb.cfg = seed.config;
    lb.x = seed.config.nodes[0];
    lb.action = seed.action;
    lb.lambda0 = seed.lambda0;
    lb.lambda1 = seed.lambda1;
    BranchPoint p0;
    p0.e = opt.e_start;
    p0.x_star = seed.x_star;
    p0.action = seed.action;
    p0.lambda0 = seed.lambda0;
    p0.lambda1 = seed.lambda1;
    p0.df_de = seed.period;
    lb.br.points.push_back(p0);

    const int k_steps = std::max(1, (int)std::llround((opt.e_end - opt.e_start) / opt.de));
    for (int k = 1; k <= k_steps; ++k) {
        double e_prev = opt.e_start + (opt.e_end - opt.e_start) * (k - 1) / k_steps;
        double e_next = opt.e_start + (opt.e_end - opt.e_start) * k / k_steps;
        if (!advance_branch(model, lb, e_prev, e_next, opt, so))
            break;
    }
    if (lb.br.end_reason.empty())
        lb.br.end_reason = "range-end";
    lb.br.last_config = lb.cfg;
    lb.br.last_warm = lb.warm;
    return lb.br;
}

GlobalStructure global_structure(const ModelSpec& model,
                                 const ContinuationOptions& opt) {
    if (!(opt.e_end > opt.e_start))
        raise(Err::Config, "sweep requires e_end > e_start");

    GlobalStructure out;
    const int k_steps = std::max(1, (int)std::llround((opt.e_end - opt.e_start) / opt.de));
    auto energy_at = [&](int k) {
        return opt.e_start + (opt.e_end - opt.e_start) * k / k_steps;
    };

    SolveOptions so = opt.solve;
    {
        ReducedSystem rs0(model, opt.e_start);
        if (so.auto_m) {
            so.m = choose_m(rs0, so);
            so.auto_m = false;
        }
    }

    // seed a branch at every local minimum of the starting energy
    ReducedSystem rs0(model, opt.e_start);
    FindMinimaResult fm0 = find_minima(rs0, so);
    std::vector<LiveBranch> live;
    int next_id = 0;
    for (const MinimizerRecord& rec : fm0.locals) {
        LiveBranch lb;
        lb.br.id = next_id++;
        lb.cfg = rec.config;
        lb.x = rec.config.nodes[0];
        lb.action = rec.action;
        lb.lambda0 = rec.lambda0;
        lb.lambda1 = rec.lambda1;
        lb.df_de = rec.period;
        BranchPoint p0;
        p0.e = opt.e_start;
        p0.x_star = rec.x_star;
        p0.action = rec.action;
        p0.lambda0 = rec.lambda0;
        p0.lambda1 = rec.lambda1;
        p0.df_de = rec.period;
        p0.audited = true;
        lb.br.points.push_back(p0);
        live.push_back(std::move(lb));
    }

    auto argmin_live = [&]() {
        int best = -1;
        for (int i = 0; i < (int)live.size(); ++i) {
            if (!live[(size_t)i].alive || live[(size_t)i].br.points.empty())
                continue;
            if (best < 0 || live[(size_t)i].action < live[(size_t)best].action)
                best = i;
        }
        return best;
    };

    auto summarize = [&](int k) {
        int best = argmin_live();
        if (best < 0)
            return;
        double e = energy_at(k);
        double fstar = live[(size_t)best].action;
        SummaryRow row;
        row.e = e;
        row.min_action = fstar;
        row.lambda0 = live[(size_t)best].lambda0;
        for (const auto& lb : live)
            if (lb.alive &&
                lb.action <= fstar + opt.solve.tie_tol * (1 + std::abs(fstar)))
                ++row.n_global_minima;
        // monodromy of the incumbent for the multiplier column
        ReducedSystem rs(model, e);
        InnerSolveResult s = inner_solve(rs, live[(size_t)best].x, so,
                                         &live[(size_t)best].cfg,
                                         &live[(size_t)best].warm);
        MinimizerRecord rec = record_from_solution(rs, std::move(s), so);
        row.multiplier_modulus = rec.monodromy.max_transverse_modulus;
        out.summary.push_back(row);
    };

    summarize(0);
    int prev_best = argmin_live();

    for (int k = 1; k <= k_steps; ++k) {
        double e_prev = energy_at(k - 1);
        double e_here = energy_at(k);
        for (auto& lb : live)
            if (lb.alive)
                advance_branch(model, lb, e_prev, e_here, opt, so);

        const bool audit_now = (opt.audit_every > 0 && k % opt.audit_every == 0) ||
                               k == k_steps;
        if (audit_now) {
            ReducedSystem rs(model, e_here);
            FindMinimaResult cold = find_minima(rs, so);
            double cold_best = std::numeric_limits<double>::infinity();
            for (const auto& g : cold.minima)
                cold_best = std::min(cold_best, g.action);
            for (const auto& g : cold.minima) {
                int nearest = -1;
                double nd = 1e30;
                for (int i = 0; i < (int)live.size(); ++i) {
                    if (!live[(size_t)i].alive)
                        continue;
                    double d = ang_dist(live[(size_t)i].x, g.x_star);
                    if (d < nd) {
                        nd = d;
                        nearest = i;
                    }
                }
                double xtol = std::max(opt.match_tol, 1e-4);
                if (nearest >= 0 && nd <= xtol) {
                    LiveBranch& lb = live[(size_t)nearest];
                    if (std::abs(lb.action - g.action) >
                        opt.match_tol * (1 + std::abs(g.action))) {
                        char buf[200];
                        std::snprintf(buf, sizeof(buf),
                                      "audit at E=%.6f: branch %d reports F=%.12f "
                                      "but the cold solve finds F=%.12f at x*=%.6f",
                                      e_here, lb.br.id, lb.action, g.action, g.x_star);
                        raise(Err::AuditMismatch, buf);
                    }
                    if (!lb.br.points.empty())
                        lb.br.points.back().audited = true;
                } else {
                    // a minimum the sweep has not been tracking: seed it
                    LiveBranch lb;
                    lb.br.id = next_id++;
                    lb.cfg = g.config;
                    lb.x = g.config.nodes[0];
                    lb.action = g.action;
                    lb.lambda0 = g.lambda0;
                    lb.lambda1 = g.lambda1;
                    lb.df_de = g.period;
                    BranchPoint pt;
                    pt.e = e_here;
                    pt.x_star = g.x_star;
                    pt.action = g.action;
                    pt.lambda0 = g.lambda0;
                    pt.lambda1 = g.lambda1;
                    pt.df_de = g.period;
                    pt.audited = true;
                    lb.br.points.push_back(pt);
                    live.push_back(std::move(lb));
                }
            }
            // a tracked branch must never undercut the cold global minimum
            int best = argmin_live();
            if (best >= 0 && live[(size_t)best].action <
                                 cold_best - opt.match_tol * (1 + std::abs(cold_best))) {
                char buf[200];
                std::snprintf(buf, sizeof(buf),
                              "audit at E=%.6f: tracked minimum %.12f undercuts "
                              "the cold solve %.12f",
                              e_here, live[(size_t)best].action, cold_best);
                raise(Err::AuditMismatch, buf);
            }
        }

        summarize(k);

        // global-minimum exchange between consecutive grid energies
        int best = argmin_live();
        if (best >= 0 && prev_best >= 0 && best != prev_best &&
            live[(size_t)best].alive && live[(size_t)prev_best].alive &&
            live[(size_t)prev_best].br.points.size() >= 2 &&
            live[(size_t)best].br.points.size() >= 2) {
            LiveBranch& a = live[(size_t)prev_best]; // incumbent below
            LiveBranch& b = live[(size_t)best];      // incumbent above
            double d_lo = a.prev_action - b.prev_action; // < 0 expected
            double d_hi = a.action - b.action;           // > 0 expected
            double tie = opt.solve.tie_tol * (1 + std::abs(b.action));
            if (d_lo < -tie && d_hi > tie) {
                double lo = e_prev, hi = e_here;
                auto value_of = [&](LiveBranch& lb, double e) {
                    return track_minimum(model, e, lb.prev_x, so, &lb.prev_cfg,
                                         lb.prev_warm.empty() ? nullptr
                                                              : &lb.prev_warm);
                };
                InnerSolveResult sa, sb;
                while (hi - lo > opt.crossing_resolution) {
                    double mid = 0.5 * (lo + hi);
                    sa = value_of(a, mid);
                    sb = value_of(b, mid);
                    if (sa.value - sb.value < 0)
                        lo = mid;
                    else
                        hi = mid;
                }
                double e_star = 0.5 * (lo + hi);
                ReducedSystem rsx(model, e_star);
                sa = value_of(a, e_star);
                sb = value_of(b, e_star);
                CrossingEvent ev;
                ev.e_star = e_star;
                ev.branch_a = a.br.id;
                ev.branch_b = b.br.id;
                ev.action = 0.5 * (sa.value + sb.value);
                ev.slope_a = sa.df_de;
                ev.slope_b = sb.df_de;
                MinimizerRecord ra = record_from_solution(rsx, std::move(sa), so);
                MinimizerRecord rb = record_from_solution(rsx, std::move(sb), so);
                classify_equivalence(ra, so);
                classify_equivalence(rb, so);
                ev.hyperbolic_a = ra.verdict == OrbitVerdict::Hyperbolic;
                ev.hyperbolic_b = rb.verdict == OrbitVerdict::Hyperbolic;
                out.crossings.push_back(ev);
            }
        }
        prev_best = best;
    }

    // ties across the whole range flag the symmetric case
    out.symmetric_tie = !out.summary.empty();
    for (const auto& row : out.summary)
        if (row.n_global_minima < 2)
            out.symmetric_tie = false;

    for (auto& lb : live) {
        if (lb.br.end_reason.empty())
            lb.br.end_reason = lb.alive ? "range-end" : "step-failure";
        lb.br.last_config = lb.cfg;
        lb.br.last_warm = lb.warm;
        out.branches.push_back(std::move(lb.br));
    }
    return out;
}

} // namespace orbits
