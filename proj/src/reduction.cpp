#include "orbits/reduction.hpp"

#include "orbits/errors.hpp"

#include <cmath>
#include <cstdio>

namespace orbits {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

struct Quadratic {
    Sym2 b;        // A^{-1}
    double v;      // potential value
    double disc;   // 2 b22 (E - V) - det(b) y1^2
};

} // namespace

ReducedSystem::ReducedSystem(ModelSpec model, double e, ReductionOptions opt)
    : model_(opt.orientation < 0 ? model.mirrored_x2() : std::move(model)),
      e_(e), opt_(opt) {
    if (opt_.orientation != 1 && opt_.orientation != -1)
        raise(Err::Config, "branch orientation must be +1 or -1");
}

double ReducedSystem::torus_x2(double tau) const {
    return opt_.orientation * tau;
}

bool ReducedSystem::in_strip(double x1) const {
    if (!has_strip())
        return true;
    double w = std::fmod(x1, kTwoPi);
    if (w < 0)
        w += kTwoPi;
    return w >= opt_.strip_lo && w <= opt_.strip_hi;
}

HbarRoot ReducedSystem::solve_hbar(double x1, double y1, double tau) const {
    Vec2 x{x1, tau};
    Sym2 b = model_.kinetic(x).inverse();
    double v = model_.potential_value(x);
    double disc = 2.0 * b.a22 * (e_ - v) - b.det() * y1 * y1;
    char buf[160];
    if (disc <= 0.0) {
        if (disc > -1e-12 * (1.0 + std::abs(e_))) {
            std::snprintf(buf, sizeof buf,
                          "dH/dy2 vanishes at the root (x1=%.6g, y1=%.6g, tau=%.6g)",
                          x1, y1, tau);
            raise(Err::BranchViolation, buf);
        }
        std::snprintf(buf, sizeof buf,
                      "no momentum root at energy %.6g (x1=%.6g, y1=%.6g, tau=%.6g)",
                      e_, x1, y1, tau);
        raise(Err::OutsideEnergyShell, buf);
    }
    double s = std::sqrt(disc);
    double w = (-b.a12 * y1 + s) / b.a22;
    // back-substitution guard
    double resid = 0.5 * b.quad({y1, w}) + v - e_;
    if (std::abs(resid) > opt_.root_residual_tol * (1.0 + std::abs(e_)))
        raise(Err::Internal, "root back-substitution residual too large");
    return {w, s};
}

double ReducedSystem::g_factor(double x1, double y1, double tau) const {
    return -1.0 / solve_hbar(x1, y1, tau).dh_dy2;
}

HbarJet ReducedSystem::hbar_jet(double x1, double y1, double tau) const {
    Vec2 x{x1, tau};
    KineticJet kj = model_.kinetic_jet(x);
    ScalarJet2 vj = model_.potential_jet(x);

    Sym2 a = kj.a;
    Sym2 b = a.inverse();
    // dB/dx1 = -B A_x1 B, d2B/dx1^2 = 2 B A_x1 B A_x1 B - B A_x1x1 B.
    auto sandwich = [&](const Sym2& mid) -> Sym2 {
        // B * mid * B for symmetric mid
        double m11 = b.a11 * mid.a11 + b.a12 * mid.a12;
        double m12 = b.a11 * mid.a12 + b.a12 * mid.a22;
        double m21 = b.a12 * mid.a11 + b.a22 * mid.a12;
        double m22 = b.a12 * mid.a12 + b.a22 * mid.a22;
        return {m11 * b.a11 + m12 * b.a12, m11 * b.a12 + m12 * b.a22,
                m21 * b.a12 + m22 * b.a22};
    };
    Sym2 bx = sandwich(kj.d1);
    bx = {-bx.a11, -bx.a12, -bx.a22};
    // B A1 B A1 B = (B A1) * (B A1 B) = -(B A1) * bx
    double p11 = b.a11 * kj.d1.a11 + b.a12 * kj.d1.a12;
    double p12 = b.a11 * kj.d1.a12 + b.a12 * kj.d1.a22;
    double p21 = b.a12 * kj.d1.a11 + b.a22 * kj.d1.a12;
    double p22 = b.a12 * kj.d1.a12 + b.a22 * kj.d1.a22;
    Sym2 bxb = {-(p11 * bx.a11 + p12 * bx.a12), -(p11 * bx.a12 + p12 * bx.a22),
                -(p21 * bx.a12 + p22 * bx.a22)};
    Sym2 b11s = sandwich(kj.d11);
    Sym2 bxx = {2.0 * bxb.a11 - b11s.a11, 2.0 * bxb.a12 - b11s.a12,
                2.0 * bxb.a22 - b11s.a22};

    double v = vj.v;
    double disc = 2.0 * b.a22 * (e_ - v) - b.det() * y1 * y1;
    if (disc <= 0.0) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "outside energy shell (x1=%.6g, y1=%.6g, tau=%.6g)", x1, y1, tau);
        raise(disc > -1e-12 * (1.0 + std::abs(e_)) ? Err::BranchViolation
                                                   : Err::OutsideEnergyShell,
              buf);
    }
    double s = std::sqrt(disc);
    double w = (-b.a12 * y1 + s) / b.a22;

    Vec2 y{y1, w};
    double hy1 = b.a11 * y1 + b.a12 * w;
    double hx = 0.5 * bx.quad(y) + vj.d1;
    double hxy1 = bx.a11 * y1 + bx.a12 * w;
    double hxy2 = bx.a12 * y1 + bx.a22 * w;
    double hxx = 0.5 * bxx.quad(y) + vj.d11;

    HbarJet j;
    j.w = w;
    j.dh_dy2 = s;
    j.wx = -hx / s;
    j.wy = -hy1 / s;
    j.wxx = -(hxx + 2.0 * hxy2 * j.wx + b.a22 * j.wx * j.wx) / s;
    j.wxy = -(hxy1 + hxy2 * j.wy + b.a12 * j.wx + b.a22 * j.wx * j.wy) / s;
    j.wyy = -(b.a11 + 2.0 * b.a12 * j.wy + b.a22 * j.wy * j.wy) / s;
    return j;
}

ReducedRhs ReducedSystem::rhs(double x1, double y1, double tau) const {
    HbarJet j = hbar_jet(x1, y1, tau);
    ReducedRhs r;
    r.fx = -j.wy;
    r.fy = j.wx;
    r.jac[0][0] = -j.wxy;
    r.jac[0][1] = -j.wyy;
    r.jac[1][0] = j.wxx;
    r.jac[1][1] = j.wxy;
    r.lbar = j.w - y1 * j.wy;
    r.dt_phys = 1.0 / j.dh_dy2;
    return r;
}

double ReducedSystem::velocity_of(double x1, double y1, double tau) const {
    return -hbar_jet(x1, y1, tau).wy;
}

ReducedLagrangian ReducedSystem::reduced_lagrangian(double x1, double xdot,
                                                    double tau) const {
    Vec2 x{x1, tau};
    Sym2 b = model_.kinetic(x).inverse();
    double v = model_.potential_value(x);
    double room = 2.0 * b.a22 * (e_ - v);
    if (room <= 0.0)
        raise(Err::OutsideEnergyShell, "no shell at this (x1, tau)");
    double ymax = std::sqrt(room / b.det());

    double lo = -ymax, hi = ymax;
    double y = 0.0;
    for (int it = 0; it < 80; ++it) {
        HbarJet j = hbar_jet(x1, y, tau);
        double g = -j.wy - xdot;
        if (std::abs(g) < 1e-12 * (1.0 + std::abs(xdot)))
            return {xdot * y + j.w, y};
        if (g > 0)
            hi = y;
        else
            lo = y;
        double dg = -j.wyy; // > 0 (convexity of the reduced generator)
        double ynew = y - g / dg;
        if (!(ynew > lo && ynew < hi))
            ynew = 0.5 * (lo + hi);
        y = ynew;
    }
    raise(Err::MomentumSolveFailure, "fiberwise momentum solve stalled");
}

} // namespace orbits
