#pragma once

#include "orbits/subarc.hpp"

#include <vector>

namespace orbits {

/// Broken-geodesic configuration: m lifted base values x_0..x_{m-1} at the
/// equispaced times tau_i = 2*pi*i/m, closing with x_m = x_0 (zero winding
/// in x1, winding one in the time angle).
struct Configuration {
    int m = 0;
    std::vector<double> nodes; // lifted reals, nodes[0] canonical in [0, 2*pi)

    static Configuration constant(int m, double x0);
    double node_wrapped(int i) const; // nodes[i mod m], lifted across the seam
};

struct TotalAction {
    double value = 0.0;
    double df_de = 0.0;                // sum of arc physical times (= period)
    std::vector<double> residual;      // m entries: dFtotal/dx_i
    std::vector<SubArcResult> arcs;    // m arcs, arc i spans (x_i, x_{i+1})
    double residual_inf() const;
};

/// Solves every sub-arc BVP of a configuration and assembles the total
/// action, its gradient (the discrete Euler-Lagrange residual) and the arc
/// data. warm_y, when given, provides/receives shooting warm starts.
TotalAction total_action(const ReducedSystem& rs, const Configuration& cfg,
                         const SubArcOptions& opt = {},
                         std::vector<double>* warm_y = nullptr);

/// Discrete Euler-Lagrange residual at node i (gradient component).
double el_residual(const TotalAction& ta, int i);

/// Cyclic tridiagonal second variation: diag A_i, off-diagonal B_i
/// (B_{m-1} in the corners).
struct JacobiMatrix {
    int m = 0;
    std::vector<double> diag; // A_i
    std::vector<double> off;  // off[i] couples node i and i+1 (mod m)
    double corner() const { return off.empty() ? 0.0 : off.back(); }
};

JacobiMatrix assemble_jacobi(const std::vector<SubArcResult>& arcs);

struct JacobiSpectrum {
    std::vector<double> eigenvalues; // ascending
    std::vector<double> ground;      // eigenvector of the smallest, ground[0] = 1
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    double gap() const { return lambda1 - lambda0; }
    bool ground_positive = false;
};

JacobiSpectrum jacobi_spectrum(const JacobiMatrix& j);

/// Cholesky test of the (m-1) x (m-1) principal submatrix that removes the
/// base node row/column.
bool jacobi_submatrix_pd(const JacobiMatrix& j);

/// Dense solve J_sub * out = rhs on the interior block (indices 1..m-1).
std::vector<double> jacobi_submatrix_solve(const JacobiMatrix& j,
                                           const std::vector<double>& rhs);

/// d2F/dx0^2 of the base-point action: Schur complement of J eliminating
/// the interior block.
double jacobi_schur_complement(const JacobiMatrix& j);

} // namespace orbits
