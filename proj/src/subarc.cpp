#include "orbits/subarc.hpp"

#include "orbits/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

namespace orbits {

namespace {

// State carried along a sub-arc: position, momentum, accumulated reduced
// action, accumulated physical time, and the 2x2 variational matrix.
struct ArcState {
    double x = 0, y = 0, act = 0, tp = 0;
    double m[2][2] = {{1, 0}, {0, 1}};
};

struct ArcDeriv {
    double x, y, act, tp;
    double m[2][2];
};

ArcDeriv arc_rhs(const ReducedSystem& rs, double tau, const ArcState& s) {
    ReducedRhs r = rs.rhs(s.x, s.y, tau);
    ArcDeriv d;
    d.x = r.fx;
    d.y = r.fy;
    d.act = r.lbar;
    d.tp = r.dt_phys;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            d.m[i][j] = r.jac[i][0] * s.m[0][j] + r.jac[i][1] * s.m[1][j];
    return d;
}

ArcState arc_step(const ReducedSystem& rs, double tau, const ArcState& s, double h) {
    auto add = [](const ArcState& a, const ArcDeriv& d, double w) {
        ArcState out = a;
        out.x += w * d.x;
        out.y += w * d.y;
        out.act += w * d.act;
        out.tp += w * d.tp;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                out.m[i][j] += w * d.m[i][j];
        return out;
    };
    ArcDeriv k1 = arc_rhs(rs, tau, s);
    ArcDeriv k2 = arc_rhs(rs, tau + 0.5 * h, add(s, k1, 0.5 * h));
    ArcDeriv k3 = arc_rhs(rs, tau + 0.5 * h, add(s, k2, 0.5 * h));
    ArcDeriv k4 = arc_rhs(rs, tau + h, add(s, k3, h));
    ArcState out = s;
    out.x += h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    out.y += h / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
    out.act += h / 6 * (k1.act + 2 * k2.act + 2 * k3.act + k4.act);
    out.tp += h / 6 * (k1.tp + 2 * k2.tp + 2 * k3.tp + k4.tp);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out.m[i][j] += h / 6 * (k1.m[i][j] + 2 * k2.m[i][j] + 2 * k3.m[i][j] + k4.m[i][j]);
    return out;
}

ArcState shoot(const ReducedSystem& rs, double tau0, double tau1, double x0,
               double y0, int steps, std::vector<double>* xs = nullptr,
               std::vector<double>* ys = nullptr) {
    ArcState s;
    s.x = x0;
    s.y = y0;
    double h = (tau1 - tau0) / steps;
    if (xs) {
        xs->clear();
        ys->clear();
        xs->push_back(s.x);
        ys->push_back(s.y);
    }
    for (int k = 0; k < steps; ++k) {
        s = arc_step(rs, tau0 + k * h, s, h);
        if (!std::isfinite(s.x) || !std::isfinite(s.y))
            raise(Err::BvpNonConvergence, "sub-arc state became non-finite");
        if (xs) {
            xs->push_back(s.x);
            ys->push_back(s.y);
        }
    }
    return s;
}

// Velocity-form jet of the reduced Lagrangian, obtained from the momentum
// form by a Legendre transform of the derivatives.
struct LbarJet {
    double v, lx, lv, lxx, lxv, lvv;
};

LbarJet lbar_jet(const ReducedSystem& rs, double x, double xdot, double tau) {
    ReducedLagrangian rl = rs.reduced_lagrangian(x, xdot, tau);
    HbarJet j = rs.hbar_jet(x, rl.y1, tau);
    LbarJet out;
    out.v = rl.value;
    out.lx = j.wx;
    out.lv = rl.y1;
    out.lvv = -1.0 / j.wyy;
    out.lxv = -j.wxy / j.wyy;
    out.lxx = j.wxx - j.wxy * j.wxy / j.wyy;
    return out;
}

// Direct minimization of the midpoint-rule discrete action over interior
// nodes of the sub-arc. Used only to produce a starting momentum for the
// shooting iteration, so modest accuracy suffices.
double direct_momentum(const ReducedSystem& rs, double tau0, double tau1,
                       double x0, double x1, int nodes) {
    int nseg = nodes + 1;
    double h = (tau1 - tau0) / nseg;
    std::vector<double> z(nseg + 1);
    for (int i = 0; i <= nseg; ++i)
        z[i] = x0 + (x1 - x0) * i / nseg;

    auto seg_jet = [&](const std::vector<double>& w, int j) {
        double xm = 0.5 * (w[j] + w[j + 1]);
        double v = (w[j + 1] - w[j]) / h;
        double tm = tau0 + (j + 0.5) * h;
        return lbar_jet(rs, xm, v, tm);
    };
    auto discrete_action = [&](const std::vector<double>& w) {
        double a = 0;
        for (int j = 0; j < nseg; ++j)
            a += h * seg_jet(w, j).v;
        return a;
    };

    double act = discrete_action(z);
    for (int it = 0; it < 14; ++it) {
        std::vector<double> grad(nodes, 0.0), dl(nodes, 0.0), dd(nodes, 0.0), du(nodes, 0.0);
        for (int j = 0; j < nseg; ++j) {
            LbarJet q = seg_jet(z, j);
            // segment j touches interior nodes j-1 (as right end) and j (as left end)
            if (j >= 1) {
                grad[j - 1] += 0.5 * h * q.lx + q.lv;
                dd[j - 1] += 0.25 * h * q.lxx + q.lxv + q.lvv / h;
            }
            if (j < nodes) {
                grad[j] += 0.5 * h * q.lx - q.lv;
                dd[j] += 0.25 * h * q.lxx - q.lxv + q.lvv / h;
            }
            if (j >= 1 && j < nodes) {
                double mixed = 0.25 * h * q.lxx - q.lvv / h;
                du[j - 1] = mixed;
                dl[j] = mixed;
            }
        }
        double gn = 0;
        for (double g : grad)
            gn = std::max(gn, std::abs(g));
        if (gn < 1e-10)
            break;
        // Thomas solve of the tridiagonal Newton system
        std::vector<double> c(nodes), r(nodes);
        double piv = dd[0];
        if (std::abs(piv) < 1e-14)
            break;
        c[0] = du[0] / piv;
        r[0] = grad[0] / piv;
        for (int i = 1; i < nodes; ++i) {
            piv = dd[i] - dl[i] * c[i - 1];
            if (std::abs(piv) < 1e-14)
                return rs.reduced_lagrangian(x0, (x1 - x0) / (tau1 - tau0), tau0).y1;
            c[i] = du[i] / piv;
            r[i] = (grad[i] - dl[i] * r[i - 1]) / piv;
        }
        std::vector<double> dz(nodes);
        dz[nodes - 1] = r[nodes - 1];
        for (int i = nodes - 2; i >= 0; --i)
            dz[i] = r[i] - c[i] * dz[i + 1];

        double scale = 1.0;
        for (int half = 0; half < 8; ++half) {
            std::vector<double> trial = z;
            for (int i = 0; i < nodes; ++i)
                trial[i + 1] -= scale * dz[i];
            double ta;
            try {
                ta = discrete_action(trial);
            } catch (const OrbitsError&) {
                scale *= 0.5;
                continue;
            }
            if (ta <= act + 1e-14 * (1 + std::abs(act))) {
                z = trial;
                act = ta;
                break;
            }
            scale *= 0.5;
        }
    }
    LbarJet first = lbar_jet(rs, 0.5 * (z[0] + z[1]), (z[1] - z[0]) / h, tau0 + 0.5 * h);
    return first.lv;
}

void check_strip(const ReducedSystem& rs, const std::vector<double>& xs,
                 double tau0, double tau1) {
    if (!rs.has_strip())
        return;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (!rs.in_strip(xs[i])) {
            char buf[160];
            double tau = tau0 + (tau1 - tau0) * double(i) / double(xs.size() - 1);
            std::snprintf(buf, sizeof(buf),
                          "sub-arc left the admissible strip at tau=%.6f, x1=%.6f", tau, xs[i]);
            raise(Err::StripExit, buf);
        }
    }
}

} // namespace

SubArcResult solve_subarc(const ReducedSystem& rs, double tau0, double tau1,
                          double x0, double x1, const SubArcOptions& opt,
                          double y_guess) {
    if (!(tau1 > tau0))
        raise(Err::Config, "sub-arc requires tau1 > tau0");
    if (std::abs(x1 - x0) > opt.gap_bound) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "endpoint gap %.6f exceeds the admissible bound %.3f",
                      std::abs(x1 - x0), opt.gap_bound);
        raise(Err::BvpNonConvergence, buf);
    }

    double y = y_guess;
    if (!std::isfinite(y)) {
        try {
            y = direct_momentum(rs, tau0, tau1, x0, x1, opt.direct_nodes);
        } catch (const OrbitsError&) {
            // fall back to the chord momentum
            y = rs.reduced_lagrangian(x0, (x1 - x0) / (tau1 - tau0), tau0).y1;
        }
    }

    ArcState s;
    bool have = false;
    double res = 0;
    int iters = 0;
    for (; iters < opt.max_iters; ++iters) {
        if (!have) {
            s = shoot(rs, tau0, tau1, x0, y, opt.steps);
            res = s.x - x1;
            have = true;
        }
        if (std::abs(res) <= opt.tol * (1 + std::abs(x1)))
            break;
        double b = s.m[0][1];
        if (!(std::isfinite(b)) || std::abs(b) < 1e-14)
            raise(Err::BvpNonConvergence, "degenerate shooting sensitivity");
        double dy = -res / b;
        if (std::abs(dy) > 1.0)
            dy = (dy > 0 ? 1.0 : -1.0);
        bool improved = false;
        for (int half = 0; half < 10; ++half) {
            double ytry = y + dy;
            ArcState st;
            try {
                st = shoot(rs, tau0, tau1, x0, ytry, opt.steps);
            } catch (const OrbitsError&) {
                dy *= 0.5;
                continue;
            }
            double rtry = st.x - x1;
            if (std::abs(rtry) < std::abs(res)) {
                y = ytry;
                s = st;
                res = rtry;
                improved = true;
                break;
            }
            dy *= 0.5;
        }
        if (!improved) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "shooting stalled at residual %.3e after %d iterations",
                          res, iters + 1);
            raise(Err::BvpNonConvergence, buf);
        }
    }
    if (std::abs(res) > opt.tol * (1 + std::abs(x1))) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "shooting did not reach tolerance: residual %.3e after %d iterations",
                      res, opt.max_iters);
        raise(Err::BvpNonConvergence, buf);
    }

    // final pass, recording the path
    std::vector<double> xs, ys;
    s = shoot(rs, tau0, tau1, x0, y, opt.steps, &xs, &ys);
    check_strip(rs, xs, tau0, tau1);

    double b = s.m[0][1];
    if (!(b > 0)) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "twist sensitivity dx_end/dy_start = %.3e is not positive", b);
        raise(Err::BvpNonConvergence, buf);
    }

    SubArcResult out;
    out.tau0 = tau0;
    out.tau1 = tau1;
    out.x0 = x0;
    out.x1 = x1;
    out.value = s.act;
    out.y_start = y;
    out.y_end = s.y;
    out.d_x = -y;
    out.d_xp = s.y;
    out.d_xx = s.m[0][0] / b;
    out.d_xxp = -1.0 / b;
    out.d_xpxp = s.m[1][1] / b;
    out.twist = b;
    out.df_de = s.tp;
    out.iters = iters;
    if (opt.keep_samples) {
        out.xs = std::move(xs);
        out.ys = std::move(ys);
    }
    return out;
}

TwistStep twist_map(const ReducedSystem& rs, double tau0, double tau1,
                    double x, double y, int steps) {
    ArcState s;
    s.x = x;
    s.y = y;
    double h = (tau1 - tau0) / steps;
    for (int k = 0; k < steps; ++k)
        s = arc_step(rs, tau0 + k * h, s, h);
    TwistStep out;
    out.x = s.x;
    out.y = s.y;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out.m[i][j] = s.m[i][j];
    return out;
}

} // namespace orbits
