#pragma once

#include "orbits/model.hpp"

#include <array>
#include <complex>
#include <vector>

namespace orbits {

/// Point of the tangent bundle in velocity form.
struct PhasePoint {
    Vec2 x{0.0, 0.0};
    Vec2 v{0.0, 0.0};
};

struct Trajectory {
    std::vector<double> t;
    std::vector<PhasePoint> states; // lifted coordinates (no wrapping)
    std::vector<double> energy;
    std::array<int, 2> winding{0, 0}; // net displacement / 2*pi, rounded
    double energy_drift = 0.0;        // max |E(t) - E(0)| over samples
    int steps = 0;
};

/// Fixed-step RK4 integration of the Euler-Lagrange flow.
/// Throws EnergyDriftExceeded when the drift tolerance is violated.
Trajectory integrate_el(const ModelSpec& model, const PhasePoint& start,
                        double t_end, int steps, double drift_tol = 1e-8);

/// Step-doubling wrapper: doubles `steps` until the drift tolerance holds.
Trajectory integrate_el_adaptive(const ModelSpec& model, const PhasePoint& start,
                                 double t_end, double drift_tol = 1e-8,
                                 int steps0 = 256, int max_steps = 1 << 20);

enum class StabilityVerdict { Hyperbolic, NonHyperbolic };

struct MonodromyResult {
    std::array<double, 16> matrix{}; // row-major 4x4 d(phi_T)/d(x1,x2,y1,y2)
    double det = 0.0;
    std::array<std::complex<double>, 4> multipliers{};
    std::array<std::complex<double>, 2> transverse{}; // after trivial-pair deflation
    double trivial_defect = 0.0; // max |lambda - 1| over the deflated pair
    double closure_defect = 0.0;
    double max_transverse_modulus = 0.0;
    StabilityVerdict verdict = StabilityVerdict::NonHyperbolic;
};

struct MonodromyOptions {
    int steps = 4096;
    double drift_tol = 1e-8;
    double closure_tol = 1e-6;
    double margin = 1e-4; // hyperbolic iff max |lambda| >= 1 + margin
    bool check_closure = true;
};

/// Linearized period map along a closed orbit, integrated in canonical
/// coordinates (x, y) so that det = 1 and multipliers come in reciprocal
/// pairs. The trajectory supplies the initial state and the period.
/// Throws NotClosed when the endpoint misses the start by more than
/// closure_tol (positions mod 2*pi, velocities exactly).
MonodromyResult monodromy(const ModelSpec& model, const Trajectory& orbit,
                          const MonodromyOptions& opt = {});

/// Monodromy from an explicit initial state and period (used by the
/// classifier, which knows the orbit closes by construction).
MonodromyResult monodromy_from_state(const ModelSpec& model, const PhasePoint& start,
                                     double period, const MonodromyOptions& opt = {});

} // namespace orbits
