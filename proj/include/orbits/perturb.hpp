#pragma once

#include "orbits/classify.hpp"
#include "orbits/continuation.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace orbits {

/// Two-mode Fourier perturbation with parameters in the cuboid [1,2]^4,
/// lifted to the torus independently of x2.
struct FourierPerturbation {
    double a1 = 1.0, b1 = 1.0, a2 = 1.0, b2 = 1.0;
    FourierSeries as_potential() const;
    bool in_cuboid() const;
};

struct KernelDiag {
    double coarse = 0.0;    // Simpson at the solver resolution
    double fine = 0.0;      // Simpson at doubled resolution
    double richardson = 0.0;
    double refinement_delta() const { return fine - coarse; }
};

/// Action-response kernel at base point x0:
///   K_E P (x0) = Int_0^{2pi} G(arc(tau)) * P(torus point of arc(tau)) dtau
/// evaluated along the minimizing broken geodesic of F(x0, E) by composite
/// Simpson with one Richardson refinement. Weight override is for tests.
double kernel_k(const ReducedSystem& rs, double x0, const FourierSeries& p,
                const SolveOptions& opt, KernelDiag* diag = nullptr,
                const std::function<double(double x1, double y1, double tau)>*
                    weight_override = nullptr);

struct FirstOrderCheck {
    std::vector<double> eps;
    std::vector<double> delta_f;   // F_eps - F_0
    std::vector<double> predicted; // eps * K_E P
    std::vector<double> residual;  // |delta_f - predicted|
    double slope = 0.0;            // log-log slope of residual vs eps
};

/// Verifies F(x0, E; eps) = F(x0, E; 0) + eps * K_E P + O(eps^2) by
/// rebuilding the reduced system at each epsilon (the model carries P;
/// epsilon scales it as part of the potential energy).
FirstOrderCheck first_order_check(const ModelSpec& model_with_p, double e,
                                  double x0, const std::vector<double>& eps,
                                  const SolveOptions& opt);

struct FourierResponse {
    int ell = 0;
    std::vector<double> x;
    std::vector<double> u, v;   // K cos = u cos - v sin, K sin = u sin + v cos
    double u_mean = 0.0;
    double u_rel_variation = 0.0; // (max-min)/|mean| of u over the window
};

FourierResponse fourier_response(const ReducedSystem& rs, int ell,
                                 const std::vector<double>& xs,
                                 const SolveOptions& opt);

struct OscResult {
    double osc = 0.0;      // max - min of F over the interval grid points
    double m_const = 0.0;  // quartic constant used
    double bound = 0.0;    // m_const * |I|^4
    bool holds = false;    // osc >= bound
};

/// Quartic lower-bound criterion on a profile interval. When m_const is not
/// supplied it defaults to max |d4F/dx0^4| / 12 estimated by five-point
/// differences on the profile grid.
OscResult osc_criterion(const ActionProfile& profile, double lo, double hi,
                        std::optional<double> m_const = std::nullopt);

struct MonteCarloSample {
    int index = 0;
    double params[4] = {0, 0, 0, 0};
    double min_lambda_ratio = 0.0; // min over audited energies of lambda0/lambda1
    bool pass = false;
    std::string failure;
};

struct MonteCarloReport {
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    double threshold = 0.0;
    int n = 0;
    int passed = 0;
    double fraction = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0; // 95% Wilson interval
    std::vector<MonteCarloSample> samples;
    std::vector<int> failures;
    /// Fraction recomputed at another threshold from stored ratios.
    double fraction_at(double threshold) const;
};

/// Samples n perturbation parameter vectors uniformly from [1,2]^4 with a
/// deterministic per-index stream, runs the global-structure sweep on
/// base + eps*P and reports the fraction whose global minimizers stay
/// nondegenerate across the sweep.
MonteCarloReport monte_carlo_nondegeneracy(const ModelSpec& base, double eps,
                                           int n, std::uint64_t seed,
                                           const ContinuationOptions& opt,
                                           double threshold = 1e-6,
                                           int jobs = 1);

} // namespace orbits
