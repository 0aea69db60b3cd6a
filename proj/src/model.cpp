#include "orbits/model.hpp"

#include "orbits/errors.hpp"

#include <cmath>
#include <cstdio>

namespace orbits {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

} // namespace

Sym2 ModelSpec::kinetic(const Vec2& x) const {
    return {a11.eval(x[0], x[1]), a12.eval(x[0], x[1]), a22.eval(x[0], x[1])};
}

KineticJet ModelSpec::kinetic_jet(const Vec2& x) const {
    KineticJet k;
    ScalarJet2 j11 = a11.jet2(x[0], x[1]);
    ScalarJet2 j12 = a12.jet2(x[0], x[1]);
    ScalarJet2 j22 = a22.jet2(x[0], x[1]);
    k.a = {j11.v, j12.v, j22.v};
    k.d1 = {j11.d1, j12.d1, j22.d1};
    k.d2 = {j11.d2, j12.d2, j22.d2};
    k.d11 = {j11.d11, j12.d11, j22.d11};
    k.d12 = {j11.d12, j12.d12, j22.d12};
    k.d22 = {j11.d22, j12.d22, j22.d22};
    return k;
}

double ModelSpec::potential_value(const Vec2& x) const {
    double v = potential.eval(x[0], x[1]);
    if (epsilon != 0.0)
        v += epsilon * perturbation.eval(x[0], x[1]);
    return v;
}

ScalarJet2 ModelSpec::potential_jet(const Vec2& x) const {
    ScalarJet2 j = potential.jet2(x[0], x[1]);
    if (epsilon != 0.0) {
        ScalarJet2 p = perturbation.jet2(x[0], x[1]);
        j.v += epsilon * p.v;
        j.d1 += epsilon * p.d1;
        j.d2 += epsilon * p.d2;
        j.d11 += epsilon * p.d11;
        j.d12 += epsilon * p.d12;
        j.d22 += epsilon * p.d22;
    }
    return j;
}

double ModelSpec::lagrangian(const Vec2& x, const Vec2& v) const {
    return 0.5 * kinetic(x).quad(v) - potential_value(x);
}

double ModelSpec::hamiltonian(const Vec2& x, const Vec2& y) const {
    return 0.5 * kinetic(x).inverse().quad(y) + potential_value(x);
}

double ModelSpec::energy_of(const Vec2& x, const Vec2& v) const {
    return 0.5 * kinetic(x).quad(v) + potential_value(x);
}

Vec2 ModelSpec::to_momentum(const Vec2& x, const Vec2& v) const {
    return kinetic(x).mul(v);
}

Vec2 ModelSpec::to_velocity(const Vec2& x, const Vec2& y) const {
    return kinetic(x).inverse().mul(y);
}

ValidationReport ModelSpec::validate(int grid, double m_l_floor) const {
    ValidationReport r;
    r.grid = grid;

    char buf[160];
    if (!(a11.all_finite() && a12.all_finite() && a22.all_finite() &&
          potential.all_finite() && perturbation.all_finite())) {
        r.message = "non-finite Fourier coefficient";
        return r;
    }
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        r.message = "epsilon must be finite and >= 0";
        return r;
    }
    if (cutoff < 1) {
        r.message = "cutoff must be >= 1";
        return r;
    }
    int used = 0;
    for (const FourierSeries* s : {&a11, &a12, &a22, &potential, &perturbation})
        used = std::max(used, s->max_mode());
    if (used > cutoff) {
        std::snprintf(buf, sizeof buf,
                      "mode %d exceeds declared cutoff %d", used, cutoff);
        r.message = buf;
        return r;
    }

    double worst = std::numeric_limits<double>::infinity();
    Vec2 worst_x{0.0, 0.0};
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            Vec2 x{kTwoPi * i / grid, kTwoPi * j / grid};
            double ev = kinetic(x).min_eigenvalue();
            if (ev < worst) {
                worst = ev;
                worst_x = x;
            }
        }
    }
    r.m_l = worst;
    r.worst_point = worst_x;
    if (worst <= m_l_floor) {
        std::snprintf(buf, sizeof buf,
                      "kinetic matrix not positive definite: min eigenvalue "
                      "%.6g at grid point (%.6g, %.6g)",
                      worst, worst_x[0], worst_x[1]);
        r.message = buf;
        return r;
    }
    r.ok = true;
    r.message = "ok";
    return r;
}

ModelSpec ModelSpec::with_epsilon(double eps) const {
    ModelSpec m = *this;
    m.epsilon = eps;
    return m;
}

ModelSpec ModelSpec::mirrored_x2() const {
    ModelSpec m = *this;
    m.a11 = a11.mirrored_x2();
    m.a12 = a12.mirrored_x2();
    m.a22 = a22.mirrored_x2();
    m.potential = potential.mirrored_x2();
    m.perturbation = perturbation.mirrored_x2();
    return m;
}

double ModelSpec::potential_max(int grid) const {
    double vmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j)
            vmax = std::max(vmax, potential_value({kTwoPi * i / grid, kTwoPi * j / grid}));
    return vmax;
}

} // namespace orbits
