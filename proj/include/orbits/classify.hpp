#pragma once

#include "orbits/action.hpp"
#include "orbits/flow.hpp"
#include "orbits/reduction.hpp"

#include <optional>
#include <vector>

namespace orbits {

struct SolveOptions {
    int m = 32;
    bool auto_m = true;        // double m (up to m_max) per refinement criterion
    int m_max = 128;
    int grid = 256;            // base-point grid of the action profile
    SubArcOptions subarc;
    double newton_tol = 1e-10; // sup-norm of the EL residual at convergence
    int max_newton = 40;
    int descent_fallback = 60; // gradient steps before retrying Newton
    double tie_tol = 1e-9;     // global-minimum tie tolerance on actions
    double dedupe_tol = 1e-6;  // angular distance merging duplicate minima
    double flat_tol = 1e-10;   // profile oscillation below which it is flat
    double degeneracy_threshold = 1e-6; // lambda0 > thr * lambda1 => nondegenerate
    double hyperbolicity_margin = 1e-4;
    MonodromyOptions monodromy;
    int jobs = 1;
};

struct InnerSolveResult {
    Configuration config;
    double value = 0.0;
    double df_de = 0.0;
    double residual = 0.0;       // max interior residual
    double base_residual = 0.0;  // residual at the (fixed) base node
    std::vector<SubArcResult> arcs;
    std::vector<double> warm_y;
    int iters = 0;
    bool interior_pd = false;
};

/// Solves the inner problem: nodes 1..m-1 critical at fixed base node x0.
/// init supplies the starting configuration (constant when m mismatches).
InnerSolveResult inner_solve(const ReducedSystem& rs, double x0,
                             const SolveOptions& opt,
                             const Configuration* init = nullptr,
                             const std::vector<double>* warm_y = nullptr);

struct ActionProfile {
    double e = 0.0;
    int m = 0;
    std::vector<double> x0;     // grid base points in [0, 2*pi)
    std::vector<double> value;  // F(x0, E); NaN where the solve failed
    std::vector<bool> valid;
    std::vector<std::pair<double, double>> smooth_windows; // around minima
    double oscillation() const; // max - min over valid entries
};

ActionProfile action_profile(const ReducedSystem& rs, const SolveOptions& opt);

/// F(x0, E) at a single base point.
InnerSolveResult action_of_base(const ReducedSystem& rs, double x0,
                                const SolveOptions& opt);

enum class OrbitVerdict { Hyperbolic, Degenerate };

struct MinimizerRecord {
    double x_star = 0.0;       // base node in [0, 2*pi)
    Configuration config;
    double action = 0.0;
    double residual = 0.0;     // full cyclic residual sup-norm
    double lambda0 = 0.0, lambda1 = 0.0;
    std::vector<double> ground;
    bool ground_positive = false;
    bool interior_pd = false;
    bool twist_ok = false;     // every B_i < 0
    double hessian_f = 0.0;    // Schur complement d2F/dx0^2
    double period = 0.0;       // physical period (= dF/dE)
    MonodromyResult monodromy;
    OrbitVerdict verdict = OrbitVerdict::Degenerate;
    bool degenerate_family = false; // flat profile (translation family)
    bool is_global = true;
};

struct FindMinimaResult {
    ActionProfile profile;
    std::vector<MinimizerRecord> minima; // global minimizers, tie-tolerant
    std::vector<MinimizerRecord> locals; // every polished local minimum
    int m_used = 0;
};

FindMinimaResult find_minima(const ReducedSystem& rs, const SolveOptions& opt);

/// Completes a converged inner solution into a full record: spectrum, twist,
/// Schur complement, period, monodromy cross-check and the verdict.
MinimizerRecord record_from_solution(const ReducedSystem& rs, InnerSolveResult&& s,
                                     const SolveOptions& opt,
                                     bool degenerate_family = false);

struct EquivalenceReport {
    bool variational_nondegenerate = false; // lambda0 > thr * lambda1, twist ok
    bool monodromy_hyperbolic = false;
    bool agree = false;
    double lambda0 = 0.0;
    double lambda_ratio = 0.0; // lambda0 / lambda1
    double max_multiplier = 0.0;
};

/// Cross-validates the two hyperbolicity certificates; throws
/// CriterionDisagreement when they differ (degenerate family records are
/// exempt from the twist requirement).
EquivalenceReport classify_equivalence(const MinimizerRecord& rec,
                                       const SolveOptions& opt);

struct CornerFit {
    std::vector<double> offsets;
    std::vector<double> corners;  // |velocity jump at the base node|
    std::vector<double> gaps;     // F(x*+offset) - F(x*)
    double theta = 0.0;           // geometric mean of corner / sqrt(gap)
    double exponent = 0.0;        // least-squares slope of log corner vs log gap
};

CornerFit corner_probe(const ReducedSystem& rs, const MinimizerRecord& rec,
                       const std::vector<double>& offsets, const SolveOptions& opt);

/// m-refinement: doubles m until the total action at the solved global
/// minimum changes by less than action_tol and every sub-arc re-solves to
/// the same arc from two distinct initializations.
int choose_m(const ReducedSystem& rs, const SolveOptions& opt,
             double action_tol = 1e-6);

} // namespace orbits
