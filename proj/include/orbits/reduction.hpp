#pragma once

#include "orbits/model.hpp"

#include <limits>

namespace orbits {

struct ReductionOptions {
    int orientation = +1;       // +1: tau = x2, -1: tau = -x2 (model mirrored)
    double strip_lo = 0.0;      // admissible x1 window; lo >= hi means full circle
    double strip_hi = 0.0;
    double root_residual_tol = 1e-10;
    double shell_margin = 1e-12; // discriminant floor before OutsideEnergyShell
};

/// Root data of H(x1, y1, x2, .) = E on the dH/dy2 > 0 branch.
struct HbarRoot {
    double value = 0.0;   // y2 at the root
    double dh_dy2 = 0.0;  // dH/dy2 there (= sqrt of the reduced discriminant)
};

/// Full jet of the root W(x1, y1, tau) through second order in (x1, y1).
struct HbarJet {
    double w = 0.0;
    double wx = 0.0, wy = 0.0;
    double wxx = 0.0, wxy = 0.0, wyy = 0.0;
    double dh_dy2 = 0.0;
};

/// Everything a sub-arc integration step needs at one (x1, y1, tau).
struct ReducedRhs {
    double fx = 0.0;   // dx1/dtau
    double fy = 0.0;   // dy1/dtau
    double jac[2][2] = {{0.0, 0.0}, {0.0, 0.0}}; // d(fx,fy)/d(x1,y1)
    double lbar = 0.0;  // action density along the flow
    double dt_phys = 0.0; // physical-time density 1/(dH/dy2) = dF/dE density
};

struct ReducedLagrangian {
    double value = 0.0; // Lbar(x1, xdot, tau)
    double y1 = 0.0;    // momentum solving xdot = d(-W)/dy1
};

/// Isoenergetic reduction of a model at energy E. The second angle becomes
/// time: internally x2 = tau (a mirrored copy of the model is used when
/// orientation = -1, so the public identities are orientation-independent).
/// The reduced dynamics in (x1, y1) are Hamiltonian with generator -W where
/// W(x1, y1, tau) is the y2-root of H = E on the dH/dy2 > 0 branch; the
/// associated Lagrangian Lbar is strictly convex in xdot.
class ReducedSystem {
public:
    ReducedSystem(ModelSpec model, double e, ReductionOptions opt = {});

    double energy() const { return e_; }
    int orientation() const { return opt_.orientation; }
    const ModelSpec& internal_model() const { return model_; }
    const ReductionOptions& options() const { return opt_; }

    /// Torus coordinate of reduced time in the caller's (unmirrored) frame.
    double torus_x2(double tau) const;

    bool has_strip() const { return opt_.strip_lo < opt_.strip_hi; }
    bool in_strip(double x1) const;

    /// Throws OutsideEnergyShell / BranchViolation.
    HbarRoot solve_hbar(double x1, double y1, double tau) const;

    /// G = -1 / (dH/dy2) at the root; G < 0 on the valid branch.
    double g_factor(double x1, double y1, double tau) const;

    HbarJet hbar_jet(double x1, double y1, double tau) const;

    ReducedRhs rhs(double x1, double y1, double tau) const;

    /// Lbar(x1, xdot, tau) = xdot*y1 + W with y1 from the fiberwise solve
    /// (safeguarded Newton inside the shell bracket).
    ReducedLagrangian reduced_lagrangian(double x1, double xdot, double tau) const;

    /// Velocity dx1/dtau generated by momentum y1.
    double velocity_of(double x1, double y1, double tau) const;

private:
    ModelSpec model_; // mirrored copy when orientation = -1
    double e_;
    ReductionOptions opt_;
};

} // namespace orbits
