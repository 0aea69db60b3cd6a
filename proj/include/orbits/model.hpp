#pragma once

#include "orbits/fourier.hpp"

#include <optional>
#include <string>

namespace orbits {

/// Jet of the kinetic matrix A(x): value and partials to second order.
struct KineticJet {
    Sym2 a;          // A
    Sym2 d1, d2;     // dA/dx1, dA/dx2
    Sym2 d11, d12, d22;
};

struct ValidationReport {
    bool ok = false;
    double m_l = 0.0;            // min eigenvalue of A over the check grid
    Vec2 worst_point{0.0, 0.0};  // grid point attaining m_l
    int grid = 0;
    std::string message;
};

/// Tonelli Lagrangian on the 2-torus:
///   L(x, v) = 0.5 * <A(x) v, v> - U(x) - epsilon * P(x)
/// with A symmetric positive definite and U, P trigonometric polynomials.
struct ModelSpec {
    FourierSeries a11 = FourierSeries::constant(1.0);
    FourierSeries a12;
    FourierSeries a22 = FourierSeries::constant(1.0);
    FourierSeries potential;     // U
    FourierSeries perturbation;  // P
    double epsilon = 0.0;
    int cutoff = 8;
    std::string name;

    Sym2 kinetic(const Vec2& x) const;
    KineticJet kinetic_jet(const Vec2& x) const;

    /// U + epsilon * P and its partials.
    double potential_value(const Vec2& x) const;
    ScalarJet2 potential_jet(const Vec2& x) const;

    double lagrangian(const Vec2& x, const Vec2& v) const;
    double hamiltonian(const Vec2& x, const Vec2& y) const;
    double energy_of(const Vec2& x, const Vec2& v) const; // <A v, v>/2 + V

    /// Legendre transform y = dL/dv and its inverse (A is SPD so the
    /// fiberwise solve is a single linear system).
    Vec2 to_momentum(const Vec2& x, const Vec2& v) const;
    Vec2 to_velocity(const Vec2& x, const Vec2& y) const;

    /// SPD check of A over an n x n grid plus coefficient sanity
    /// (finite values, declared cutoff respected, epsilon >= 0).
    ValidationReport validate(int grid = 48, double m_l_floor = 1e-8) const;

    ModelSpec with_epsilon(double eps) const;
    /// x2 -> -x2 in every Fourier table.
    ModelSpec mirrored_x2() const;
    /// Max over torus grid of U + epsilon*P (upper bound for shell checks).
    double potential_max(int grid = 96) const;
};

} // namespace orbits
