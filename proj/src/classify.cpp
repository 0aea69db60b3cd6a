#include "orbits/classify.hpp"

#include "orbits/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace orbits {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double wrap_base(double x) {
    double w = std::fmod(x, kTwoPi);
    if (w < 0)
        w += kTwoPi;
    return w;
}

double interior_sup(const TotalAction& ta) {
    double r = 0;
    for (size_t i = 1; i < ta.residual.size(); ++i)
        r = std::max(r, std::abs(ta.residual[i]));
    return r;
}

} // namespace

InnerSolveResult inner_solve(const ReducedSystem& rs, double x0,
                             const SolveOptions& opt, const Configuration* init,
                             const std::vector<double>* warm_y) {
    const int m = opt.m;
    Configuration cfg;
    if (init && init->m == m) {
        cfg = *init;
        cfg.nodes[0] = x0;
    } else {
        cfg = Configuration::constant(m, x0);
        cfg.nodes[0] = x0;
    }
    std::vector<double> warm;
    if (warm_y && warm_y->size() == (size_t)m)
        warm = *warm_y;

    TotalAction ta = total_action(rs, cfg, opt.subarc, &warm);
    double rnorm = interior_sup(ta);
    int iters = 0;
    for (; iters < opt.max_newton && rnorm >= opt.newton_tol; ++iters) {
        bool accepted = false;
        if (m > 1) {
            // Newton step on the interior nodes
            JacobiMatrix jac = assemble_jacobi(ta.arcs);
            std::vector<double> rhs(ta.residual.begin() + 1, ta.residual.end());
            std::vector<double> step;
            try {
                step = jacobi_submatrix_solve(jac, rhs);
            } catch (const OrbitsError&) {
                step.clear();
            }
            if (!step.empty()) {
                for (double& s : step)
                    s = std::clamp(s, -0.4, 0.4);
                double scale = 1.0;
                for (int half = 0; half < 8 && !accepted; ++half) {
                    Configuration trial = cfg;
                    for (int i = 1; i < m; ++i)
                        trial.nodes[(size_t)i] -= scale * step[(size_t)(i - 1)];
                    std::vector<double> warm2 = warm;
                    try {
                        TotalAction t2 = total_action(rs, trial, opt.subarc, &warm2);
                        double r2 = interior_sup(t2);
                        if (r2 < rnorm * (1 - 1e-4) || r2 < opt.newton_tol) {
                            cfg = std::move(trial);
                            ta = std::move(t2);
                            warm = std::move(warm2);
                            rnorm = r2;
                            accepted = true;
                        }
                    } catch (const OrbitsError&) {
                    }
                    scale *= 0.5;
                }
            }
        }
        if (!accepted && m > 1) {
            // backtracking gradient descent on the action value
            double sigma = 0.05;
            int moves = 0;
            for (int d = 0; d < opt.descent_fallback && sigma > 1e-12; ++d) {
                Configuration trial = cfg;
                for (int i = 1; i < m; ++i)
                    trial.nodes[(size_t)i] -= sigma * ta.residual[(size_t)i];
                std::vector<double> warm2 = warm;
                try {
                    TotalAction t2 = total_action(rs, trial, opt.subarc, &warm2);
                    if (t2.value < ta.value - 1e-15) {
                        cfg = std::move(trial);
                        ta = std::move(t2);
                        warm = std::move(warm2);
                        ++moves;
                        continue;
                    }
                } catch (const OrbitsError&) {
                }
                sigma *= 0.5;
            }
            rnorm = interior_sup(ta);
            if (moves == 0 && rnorm >= opt.newton_tol) {
                char buf[160];
                std::snprintf(buf, sizeof(buf),
                              "inner solve stalled at x0=%.6f with residual %.3e",
                              x0, rnorm);
                raise(Err::NewtonDivergence, buf);
            }
        }
        if (m == 1)
            break;
    }
    if (rnorm >= opt.newton_tol && m > 1) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "inner solve at x0=%.6f did not converge: residual %.3e",
                      x0, rnorm);
        raise(Err::NewtonDivergence, buf);
    }

    InnerSolveResult out;
    out.value = ta.value;
    out.df_de = ta.df_de;
    out.residual = rnorm;
    out.base_residual = ta.residual[0];
    out.arcs = std::move(ta.arcs);
    out.warm_y = std::move(warm);
    out.config = std::move(cfg);
    out.iters = iters;
    out.interior_pd = jacobi_submatrix_pd(assemble_jacobi(out.arcs));
    return out;
}

InnerSolveResult action_of_base(const ReducedSystem& rs, double x0,
                                const SolveOptions& opt) {
    return inner_solve(rs, x0, opt);
}

double ActionProfile::oscillation() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (size_t i = 0; i < value.size(); ++i)
        if (valid[i]) {
            lo = std::min(lo, value[i]);
            hi = std::max(hi, value[i]);
        }
    return hi > lo ? hi - lo : 0.0;
}

ActionProfile action_profile(const ReducedSystem& rs, const SolveOptions& opt) {
    ActionProfile p;
    p.e = rs.energy();
    p.m = opt.m;
    const int n = opt.grid;
    p.x0.resize((size_t)n);
    p.value.assign((size_t)n, std::numeric_limits<double>::quiet_NaN());
    p.valid.assign((size_t)n, false);

    Configuration carry;
    std::vector<double> warm;
    bool have_carry = false;
    for (int jj = 0; jj < n; ++jj) {
        double x0 = kTwoPi * jj / n;
        p.x0[(size_t)jj] = x0;
        try {
            const Configuration* init = nullptr;
            Configuration shifted;
            if (have_carry) {
                shifted = carry;
                double delta = x0 - shifted.nodes[0];
                for (double& v : shifted.nodes)
                    v += delta;
                init = &shifted;
            }
            InnerSolveResult s =
                inner_solve(rs, x0, opt, init, have_carry ? &warm : nullptr);
            p.value[(size_t)jj] = s.value;
            p.valid[(size_t)jj] = true;
            carry = std::move(s.config);
            warm = std::move(s.warm_y);
            have_carry = true;
        } catch (const OrbitsError&) {
            have_carry = false;
        }
    }

    // basins of attraction of the profile's local minima
    auto vat = [&](int i) { return p.value[(size_t)((i % n + n) % n)]; };
    auto ok = [&](int i) { return p.valid[(size_t)((i % n + n) % n)]; };
    for (int j = 0; j < n; ++j) {
        if (!ok(j) || !ok(j - 1) || !ok(j + 1))
            continue;
        if (!(vat(j) <= vat(j - 1) && vat(j) <= vat(j + 1)))
            continue;
        int l = j, r = j;
        while (l > j - n && ok(l - 1) && vat(l - 1) >= vat(l))
            --l;
        while (r < j + n && ok(r + 1) && vat(r + 1) >= vat(r))
            ++r;
        p.smooth_windows.emplace_back(kTwoPi * l / n, kTwoPi * r / n);
    }
    return p;
}

MinimizerRecord record_from_solution(const ReducedSystem& rs, InnerSolveResult&& s,
                                     const SolveOptions& opt, bool degen_family) {
    MinimizerRecord rec;
    rec.x_star = wrap_base(s.config.nodes[0]);
    rec.action = s.value;
    rec.residual = std::max(s.residual, std::abs(s.base_residual));
    rec.period = s.df_de;
    rec.interior_pd = s.interior_pd;
    rec.degenerate_family = degen_family;

    JacobiMatrix jac = assemble_jacobi(s.arcs);
    JacobiSpectrum spec = jacobi_spectrum(jac);
    rec.lambda0 = spec.lambda0;
    rec.lambda1 = spec.lambda1;
    rec.ground = std::move(spec.ground);
    rec.ground_positive = spec.ground_positive;
    rec.twist_ok = true;
    for (double b : jac.off)
        if (!(b < 0))
            rec.twist_ok = false;
    rec.hessian_f = jacobi_schur_complement(jac);

    // lift to the full phase space and run the monodromy cross-check
    double y1 = s.arcs[0].y_start;
    double w = rs.solve_hbar(s.config.nodes[0], y1, 0.0).value;
    const ModelSpec& im = rs.internal_model();
    PhasePoint start;
    start.x = {rec.x_star, 0.0};
    start.v = im.to_velocity(start.x, {y1, w});
    rec.monodromy = monodromy_from_state(im, start, rec.period, opt.monodromy);

    bool var_nd = rec.lambda1 > 0 &&
                  rec.lambda0 > opt.degeneracy_threshold * rec.lambda1 &&
                  rec.twist_ok;
    rec.verdict = var_nd ? OrbitVerdict::Hyperbolic : OrbitVerdict::Degenerate;
    rec.config = std::move(s.config);
    return rec;
}

namespace {

// Safeguarded scalar Newton on g(x0) = dF/dx0 inside a bracket.
InnerSolveResult polish_minimum(const ReducedSystem& rs, double lo, double hi,
                                double xinit, const SolveOptions& opt,
                                const Configuration* init) {
    Configuration carry;
    bool have_carry = false;
    if (init) {
        carry = *init;
        have_carry = true;
    }
    auto solve_at = [&](double x) {
        const Configuration* ini = have_carry ? &carry : nullptr;
        InnerSolveResult s = inner_solve(rs, x, opt, ini);
        carry = s.config;
        have_carry = true;
        return s;
    };

    double x = xinit;
    InnerSolveResult s = solve_at(x);
    for (int it = 0; it < 60; ++it) {
        double g = s.base_residual;
        if (std::abs(g) < opt.newton_tol || hi - lo < 1e-13)
            break;
        double hess = 0.0;
        try {
            hess = jacobi_schur_complement(assemble_jacobi(s.arcs));
        } catch (const OrbitsError&) {
        }
        double xn;
        if (std::isfinite(hess) && hess > 1e-12) {
            xn = x - g / hess;
            if (!(xn > lo && xn < hi))
                xn = 0.5 * (lo + hi);
        } else {
            xn = 0.5 * (lo + hi);
        }
        if (g > 0)
            hi = x;
        else
            lo = x;
        if (!(xn > lo && xn < hi))
            xn = 0.5 * (lo + hi);
        x = xn;
        s = solve_at(x);
    }
    return s;
}

} // namespace

FindMinimaResult find_minima(const ReducedSystem& rs, const SolveOptions& opt) {
    SolveOptions local = opt;
    if (opt.auto_m) {
        local.m = choose_m(rs, opt);
        local.auto_m = false;
    }

    FindMinimaResult out;
    out.m_used = local.m;
    out.profile = action_profile(rs, local);
    const ActionProfile& p = out.profile;
    const int n = (int)p.x0.size();

    int best = -1;
    for (int j = 0; j < n; ++j)
        if (p.valid[(size_t)j] && (best < 0 || p.value[(size_t)j] < p.value[(size_t)best]))
            best = j;
    if (best < 0)
        raise(Err::NoMinimumFound, "no base point admits a broken geodesic");

    if (p.oscillation() < opt.flat_tol) {
        // translation family: every base point minimizes
        InnerSolveResult s = inner_solve(rs, p.x0[(size_t)best], local);
        MinimizerRecord rec = record_from_solution(rs, std::move(s), local, true);
        rec.is_global = true;
        out.minima.push_back(rec);
        out.locals.push_back(std::move(rec));
        return out;
    }

    auto vat = [&](int i) { return p.value[(size_t)((i % n + n) % n)]; };
    auto ok = [&](int i) { return p.valid[(size_t)((i % n + n) % n)]; };

    std::vector<MinimizerRecord> candidates;
    for (int j = 0; j < n; ++j) {
        if (!ok(j) || !ok(j - 1) || !ok(j + 1))
            continue;
        if (!(vat(j) <= vat(j - 1) && vat(j) <= vat(j + 1)))
            continue;
        double h = kTwoPi / n;
        double xc = p.x0[(size_t)j];
        try {
            InnerSolveResult s = polish_minimum(rs, xc - h, xc + h, xc, local, nullptr);
            candidates.push_back(record_from_solution(rs, std::move(s), local, false));
        } catch (const OrbitsError&) {
            // a candidate that cannot be polished is dropped; others remain
        }
    }
    if (candidates.empty())
        raise(Err::NoMinimumFound, "no polishable local minimum");

    // dedupe by angular distance, keeping the lower action
    std::sort(candidates.begin(), candidates.end(),
              [](const MinimizerRecord& a, const MinimizerRecord& b) {
                  return a.x_star < b.x_star;
              });
    std::vector<MinimizerRecord> unique;
    for (auto& c : candidates) {
        bool merged = false;
        for (auto& u : unique) {
            double d = std::abs(c.x_star - u.x_star);
            d = std::min(d, kTwoPi - d);
            if (d < opt.dedupe_tol) {
                if (c.action < u.action)
                    u = std::move(c);
                merged = true;
                break;
            }
        }
        if (!merged)
            unique.push_back(std::move(c));
    }

    double fstar = std::numeric_limits<double>::infinity();
    for (const auto& u : unique)
        fstar = std::min(fstar, u.action);
    for (auto& u : unique) {
        u.is_global = u.action <= fstar + opt.tie_tol * (1 + std::abs(fstar));
        if (u.is_global)
            out.minima.push_back(u);
        out.locals.push_back(std::move(u));
    }
    return out;
}

EquivalenceReport classify_equivalence(const MinimizerRecord& rec,
                                       const SolveOptions& opt) {
    EquivalenceReport rep;
    rep.lambda0 = rec.lambda0;
    rep.lambda_ratio = rec.lambda1 > 0 ? rec.lambda0 / rec.lambda1 : 0.0;
    rep.max_multiplier = rec.monodromy.max_transverse_modulus;
    bool twist_req = rec.degenerate_family ? true : rec.twist_ok;
    rep.variational_nondegenerate =
        rec.lambda1 > 0 && rec.lambda0 > opt.degeneracy_threshold * rec.lambda1 &&
        twist_req;
    rep.monodromy_hyperbolic = rec.monodromy.verdict == StabilityVerdict::Hyperbolic;
    rep.agree = rep.variational_nondegenerate == rep.monodromy_hyperbolic;
    if (!rep.agree) {
        char buf[220];
        std::snprintf(buf, sizeof(buf),
                      "certificates disagree at x*=%.6f: lambda0=%.3e (ratio %.3e) "
                      "vs max transverse multiplier %.6f",
                      rec.x_star, rec.lambda0, rep.lambda_ratio, rep.max_multiplier);
        raise(Err::CriterionDisagreement, buf);
    }
    return rep;
}

CornerFit corner_probe(const ReducedSystem& rs, const MinimizerRecord& rec,
                       const std::vector<double>& offsets, const SolveOptions& opt) {
    SolveOptions local = opt;
    local.m = rec.config.m;
    local.auto_m = false;

    CornerFit fit;
    for (double d : offsets) {
        double x0 = rec.x_star + d;
        InnerSolveResult s = inner_solve(rs, x0, local, &rec.config);
        double yl = s.arcs.back().y_end;
        double yr = s.arcs.front().y_start;
        double vl = rs.velocity_of(x0, yl, kTwoPi);
        double vr = rs.velocity_of(x0, yr, 0.0);
        double gap = s.value - rec.action;
        if (!(gap > 0))
            continue;
        fit.offsets.push_back(d);
        fit.corners.push_back(std::abs(vr - vl));
        fit.gaps.push_back(gap);
    }

    const size_t k = fit.offsets.size();
    if (k >= 2) {
        double slx = 0, sly = 0, sxx = 0, sxy = 0, logsum = 0;
        for (size_t i = 0; i < k; ++i) {
            double lx = std::log(fit.gaps[i]);
            double ly = std::log(fit.corners[i]);
            slx += lx;
            sly += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            logsum += ly - 0.5 * lx;
        }
        double denom = k * sxx - slx * slx;
        fit.exponent = denom != 0 ? (k * sxy - slx * sly) / denom : 0.0;
        fit.theta = std::exp(logsum / (double)k);
    }
    return fit;
}

int choose_m(const ReducedSystem& rs, const SolveOptions& opt, double action_tol) {
    int m = std::max(2, opt.m);
    const int probes = 12;
    while (2 * m <= opt.m_max) {
        SolveOptions o1 = opt;
        o1.m = m;
        o1.auto_m = false;
        SolveOptions o2 = opt;
        o2.m = 2 * m;
        o2.auto_m = false;

        bool all_ok = true;
        double worst = 0, best = std::numeric_limits<double>::infinity(), bestx = 0;
        for (int j = 0; j < probes && all_ok; ++j) {
            double x0 = kTwoPi * j / probes;
            try {
                double f1 = inner_solve(rs, x0, o1).value;
                double f2 = inner_solve(rs, x0, o2).value;
                worst = std::max(worst, std::abs(f2 - f1));
                if (f2 < best) {
                    best = f2;
                    bestx = x0;
                }
            } catch (const OrbitsError&) {
                all_ok = false;
            }
        }
        if (all_ok && worst <= action_tol * (1 + std::abs(best))) {
            // sub-arc uniqueness probe at the best base point
            bool unique = true;
            try {
                InnerSolveResult s = inner_solve(rs, bestx, o1);
                for (int pick : {0, m / 4, m / 2, (3 * m) / 4}) {
                    const SubArcResult& a = s.arcs[(size_t)(pick % m)];
                    SubArcResult fresh =
                        solve_subarc(rs, a.tau0, a.tau1, a.x0, a.x1, opt.subarc);
                    if (std::abs(fresh.y_start - a.y_start) > 1e-8)
                        unique = false;
                    try {
                        SubArcResult nudged = solve_subarc(rs, a.tau0, a.tau1, a.x0,
                                                           a.x1, opt.subarc,
                                                           a.y_start + 0.1);
                        if (std::abs(nudged.y_start - a.y_start) > 1e-8)
                            unique = false;
                    } catch (const OrbitsError&) {
                        // the nudge failing to converge exposes no second arc
                    }
                }
            } catch (const OrbitsError&) {
                unique = false;
            }
            if (unique)
                return m;
        }
        m *= 2;
    }
    return std::min(m, opt.m_max);
}

} // namespace orbits
