#pragma once

#include "orbits/reduction.hpp"

#include <limits>
#include <vector>

namespace orbits {

struct SubArcOptions {
    int steps = 32;          // RK4 steps per sub-arc
    int direct_nodes = 16;   // interior nodes of the direct-method initializer
    double tol = 1e-12;      // shooting residual tolerance (scaled)
    int max_iters = 40;
    double gap_bound = 2.0;  // max admissible |x' - x|
    bool keep_samples = true;
};

/// Minimizing arc between fixed endpoints over one time slice, with the
/// derivative data of the generating function F_i(x, x').
struct SubArcResult {
    double tau0 = 0.0, tau1 = 0.0;
    double x0 = 0.0, x1 = 0.0;   // lifted endpoints
    double value = 0.0;          // F_i
    double y_start = 0.0, y_end = 0.0;
    double d_x = 0.0, d_xp = 0.0;            // dF/dx = -y_start, dF/dx' = y_end
    double d_xx = 0.0, d_xxp = 0.0, d_xpxp = 0.0;
    double twist = 0.0;          // dx_end/dy_start; twist > 0 iff d_xxp < 0
    double df_de = 0.0;          // = physical time of the arc
    int iters = 0;
    std::vector<double> xs, ys;  // solution samples at steps+1 nodes
};

SubArcResult solve_subarc(const ReducedSystem& rs, double tau0, double tau1,
                          double x0, double x1, const SubArcOptions& opt = {},
                          double y_guess = std::numeric_limits<double>::quiet_NaN());

/// One application of the time-slice twist map (x, y) -> (x', y') together
/// with its Jacobian.
struct TwistStep {
    double x = 0.0, y = 0.0;
    double m[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
    double det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
};

TwistStep twist_map(const ReducedSystem& rs, double tau0, double tau1,
                    double x, double y, int steps = 32);

} // namespace orbits
