#pragma once

#include "orbits/classify.hpp"

#include <string>
#include <vector>

namespace orbits {

struct ContinuationOptions {
    double e_start = 0.0;
    double e_end = 0.0;
    double de = 0.02;
    double de_min = 1e-5;
    int audit_every = 10;          // cold-start audit cadence (steps)
    double match_tol = 1e-6;       // branch-to-audit x* matching distance
    double crossing_resolution = 1e-8;
    double slope_margin = 1e-6;    // min |slope_a - slope_b| at a crossing
    SolveOptions solve;
};

struct BranchPoint {
    double e = 0.0;
    double x_star = 0.0;
    double action = 0.0;
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    double df_de = 0.0; // one-sided slope dF/dE (= orbit period)
    bool audited = false;
};

struct Branch {
    int id = 0;
    std::vector<BranchPoint> points; // ascending in E
    Configuration last_config;
    std::vector<double> last_warm;
    std::string end_reason; // "range-end", "degenerate", "step-failure"
};

/// Natural-parameter continuation of one minimizer branch from a seed
/// record at options.e_start toward options.e_end.
Branch continue_branch(const ModelSpec& model, const MinimizerRecord& seed,
                       const ContinuationOptions& opt, int id = 0);

struct CrossingEvent {
    double e_star = 0.0;
    int branch_a = 0, branch_b = 0;
    double action = 0.0;
    double slope_a = 0.0, slope_b = 0.0;
    bool hyperbolic_a = false, hyperbolic_b = false;
    double slope_gap() const { return slope_a - slope_b; }
};

struct SummaryRow {
    double e = 0.0;
    int n_global_minima = 0;
    double min_action = 0.0;
    double lambda0 = 0.0;
    double multiplier_modulus = 0.0;
};

struct GlobalStructure {
    std::vector<Branch> branches;
    std::vector<CrossingEvent> crossings;
    std::vector<SummaryRow> summary;
    bool symmetric_tie = false; // branches tied across the whole range
};

/// Full sweep: seeds branches at e_start, continues them across the range
/// with periodic cold-start audits (new branches seeded from unmatched
/// audit minima; AuditMismatch when an audit minimum cannot be explained),
/// then localizes global-minimum exchanges to crossing_resolution.
GlobalStructure global_structure(const ModelSpec& model,
                                 const ContinuationOptions& opt);

} // namespace orbits
