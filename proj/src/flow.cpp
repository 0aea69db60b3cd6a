#include "orbits/flow.hpp"

#include "orbits/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace orbits {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

struct ElState {
    Vec2 x, v;
};

ElState el_rhs(const ModelSpec& model, const ElState& s) {
    KineticJet kj = model.kinetic_jet(s.x);
    ScalarJet2 vj = model.potential_jet(s.x);
    const Vec2& v = s.v;
    Vec2 g{0.5 * kj.d1.quad(v) - vj.d1, 0.5 * kj.d2.quad(v) - vj.d2};
    Vec2 a1v = kj.d1.mul(v), a2v = kj.d2.mul(v);
    Vec2 w{g[0] - (a1v[0] * v[0] + a2v[0] * v[1]),
           g[1] - (a1v[1] * v[0] + a2v[1] * v[1])};
    return {v, kj.a.inverse().mul(w)};
}

ElState axpy(const ElState& a, double h, const ElState& b) {
    return {{a.x[0] + h * b.x[0], a.x[1] + h * b.x[1]},
            {a.v[0] + h * b.v[0], a.v[1] + h * b.v[1]}};
}

using Eigen::Matrix2d;
using Eigen::Matrix4d;
using Eigen::Vector2d;
using Eigen::Vector4d;

Matrix2d sym_to_mat(const Sym2& s) {
    Matrix2d m;
    m << s.a11, s.a12, s.a12, s.a22;
    return m;
}

struct HamJet {
    Vector4d f;   // (dx, dy)
    Matrix4d s;   // variational matrix d f / d z
};

/// Canonical vector field and its linearization at z = (x1, x2, y1, y2).
HamJet ham_rhs(const ModelSpec& model, const Vector4d& z) {
    Vec2 x{z[0], z[1]};
    Vector2d y(z[2], z[3]);
    KineticJet kj = model.kinetic_jet(x);
    ScalarJet2 vj = model.potential_jet(x);

    Matrix2d a = sym_to_mat(kj.a);
    Matrix2d b = a.inverse();
    Matrix2d ad[2] = {sym_to_mat(kj.d1), sym_to_mat(kj.d2)};
    Matrix2d add[2][2] = {{sym_to_mat(kj.d11), sym_to_mat(kj.d12)},
                          {sym_to_mat(kj.d12), sym_to_mat(kj.d22)}};
    Matrix2d bd[2];
    for (int i = 0; i < 2; ++i)
        bd[i] = -b * ad[i] * b;

    double vd[2] = {vj.d1, vj.d2};
    double vdd[2][2] = {{vj.d11, vj.d12}, {vj.d12, vj.d22}};

    HamJet out;
    Vector2d xdot = b * y;
    Vector2d ydot;
    for (int i = 0; i < 2; ++i)
        ydot[i] = -(0.5 * y.dot(bd[i] * y) + vd[i]);
    out.f << xdot[0], xdot[1], ydot[0], ydot[1];

    Matrix2d c; // d(By)/dx, columns indexed by x_j
    for (int j = 0; j < 2; ++j)
        c.col(j) = bd[j] * y;
    Matrix2d hxx;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            Matrix2d bij = b * ad[j] * b * ad[i] * b + b * ad[i] * b * ad[j] * b -
                           b * add[i][j] * b;
            hxx(i, j) = 0.5 * y.dot(bij * y) + vdd[i][j];
        }
    }
    out.s.setZero();
    out.s.block<2, 2>(0, 0) = c;
    out.s.block<2, 2>(0, 2) = b;
    out.s.block<2, 2>(2, 0) = -hxx;
    out.s.block<2, 2>(2, 2) = -c.transpose();
    return out;
}

double wrap_angle(double d) {
    d = std::fmod(d, kTwoPi);
    if (d > 0.5 * kTwoPi)
        d -= kTwoPi;
    if (d < -0.5 * kTwoPi)
        d += kTwoPi;
    return d;
}

} // namespace

Trajectory integrate_el(const ModelSpec& model, const PhasePoint& start,
                        double t_end, int steps, double drift_tol) {
    if (steps < 1)
        raise(Err::Config, "integrate_el: steps must be >= 1");
    Trajectory tr;
    tr.steps = steps;
    tr.t.reserve(steps + 1);
    tr.states.reserve(steps + 1);
    tr.energy.reserve(steps + 1);

    ElState s{start.x, start.v};
    double h = t_end / steps;
    double e0 = model.energy_of(s.x, s.v);
    tr.t.push_back(0.0);
    tr.states.push_back({s.x, s.v});
    tr.energy.push_back(e0);
    double drift = 0.0;
    for (int k = 0; k < steps; ++k) {
        ElState k1 = el_rhs(model, s);
        ElState k2 = el_rhs(model, axpy(s, 0.5 * h, k1));
        ElState k3 = el_rhs(model, axpy(s, 0.5 * h, k2));
        ElState k4 = el_rhs(model, axpy(s, h, k3));
        for (int i = 0; i < 2; ++i) {
            s.x[i] += h / 6.0 * (k1.x[i] + 2 * k2.x[i] + 2 * k3.x[i] + k4.x[i]);
            s.v[i] += h / 6.0 * (k1.v[i] + 2 * k2.v[i] + 2 * k3.v[i] + k4.v[i]);
        }
        double e = model.energy_of(s.x, s.v);
        drift = std::max(drift, std::abs(e - e0));
        tr.t.push_back((k + 1) * h);
        tr.states.push_back({s.x, s.v});
        tr.energy.push_back(e);
    }
    tr.energy_drift = drift;
    tr.winding = {(int)std::lround((s.x[0] - start.x[0]) / kTwoPi),
                  (int)std::lround((s.x[1] - start.x[1]) / kTwoPi)};
    if (drift > drift_tol)
        raise(Err::EnergyDriftExceeded,
              "energy drift " + std::to_string(drift) + " exceeds tolerance; "
              "increase the step count");
    return tr;
}

Trajectory integrate_el_adaptive(const ModelSpec& model, const PhasePoint& start,
                                 double t_end, double drift_tol, int steps0,
                                 int max_steps) {
    for (int steps = steps0; steps <= max_steps; steps *= 2) {
        try {
            return integrate_el(model, start, t_end, steps, drift_tol);
        } catch (const OrbitsError& e) {
            if (e.code() != Err::EnergyDriftExceeded || 2 * steps > max_steps)
                throw;
        }
    }
    raise(Err::EnergyDriftExceeded, "step doubling exhausted");
}

MonodromyResult monodromy_from_state(const ModelSpec& model, const PhasePoint& start,
                                     double period, const MonodromyOptions& opt) {
    Vector4d z;
    Vec2 y0 = model.to_momentum(start.x, start.v);
    z << start.x[0], start.x[1], y0[0], y0[1];
    Matrix4d m = Matrix4d::Identity();

    double h = period / opt.steps;
    double e0 = model.hamiltonian({z[0], z[1]}, {z[2], z[3]});
    double drift = 0.0;
    for (int k = 0; k < opt.steps; ++k) {
        HamJet k1 = ham_rhs(model, z);
        Matrix4d m1 = k1.s * m;
        HamJet k2 = ham_rhs(model, z + 0.5 * h * k1.f);
        Matrix4d m2 = k2.s * (m + 0.5 * h * m1);
        HamJet k3 = ham_rhs(model, z + 0.5 * h * k2.f);
        Matrix4d m3 = k3.s * (m + 0.5 * h * m2);
        HamJet k4 = ham_rhs(model, z + h * k3.f);
        Matrix4d m4 = k4.s * (m + h * m3);
        z += h / 6.0 * (k1.f + 2 * k2.f + 2 * k3.f + k4.f);
        m += h / 6.0 * (m1 + 2 * m2 + 2 * m3 + m4);
        drift = std::max(drift, std::abs(model.hamiltonian({z[0], z[1]}, {z[2], z[3]}) - e0));
    }
    if (drift > opt.drift_tol)
        raise(Err::EnergyDriftExceeded,
              "monodromy integration drift " + std::to_string(drift));

    MonodromyResult res;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            res.matrix[4 * i + j] = m(i, j);
    res.det = m.determinant();

    Vector4d zstart;
    zstart << start.x[0], start.x[1], y0[0], y0[1];
    res.closure_defect = std::max(
        std::max(std::abs(wrap_angle(z[0] - zstart[0])), std::abs(wrap_angle(z[1] - zstart[1]))),
        std::max(std::abs(z[2] - zstart[2]), std::abs(z[3] - zstart[3])));

    Eigen::EigenSolver<Matrix4d> es(m);
    if (es.info() != Eigen::Success)
        raise(Err::Internal, "eigenvalue solve failed");
    std::array<std::complex<double>, 4> mult;
    for (int i = 0; i < 4; ++i)
        mult[i] = es.eigenvalues()[i];

    // The trivial pair is the two multipliers closest to 1 in log distance.
    auto logdist = [](std::complex<double> lam) {
        double r = std::abs(lam);
        if (r <= 0.0)
            return 1e300;
        return std::hypot(std::log(r), std::arg(lam));
    };
    std::array<int, 4> idx{0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return logdist(mult[a]) < logdist(mult[b]); });
    res.multipliers = mult;
    res.trivial_defect = std::max(std::abs(mult[idx[0]] - 1.0), std::abs(mult[idx[1]] - 1.0));
    res.transverse = {mult[idx[2]], mult[idx[3]]};
    res.max_transverse_modulus =
        std::max(std::abs(res.transverse[0]), std::abs(res.transverse[1]));
    res.verdict = res.max_transverse_modulus >= 1.0 + opt.margin
                      ? StabilityVerdict::Hyperbolic
                      : StabilityVerdict::NonHyperbolic;
    return res;
}

MonodromyResult monodromy(const ModelSpec& model, const Trajectory& orbit,
                          const MonodromyOptions& opt) {
    if (orbit.t.size() < 2)
        raise(Err::Config, "monodromy: trajectory has no samples");
    const PhasePoint& a = orbit.states.front();
    const PhasePoint& b = orbit.states.back();
    if (opt.check_closure) {
        double defect = std::max(
            std::max(std::abs(wrap_angle(b.x[0] - a.x[0])), std::abs(wrap_angle(b.x[1] - a.x[1]))),
            std::max(std::abs(b.v[0] - a.v[0]), std::abs(b.v[1] - a.v[1])));
        if (defect > opt.closure_tol)
            raise(Err::NotClosed, "orbit endpoint misses the start by " +
                                      std::to_string(defect));
    }
    return monodromy_from_state(model, a, orbit.t.back() - orbit.t.front(), opt);
}

} // namespace orbits
