#pragma once

#include "orbits/model.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace testutil {

using orbits::FourierSeries;
using orbits::FourierTerm;
using orbits::ModelSpec;

constexpr double kPi = 3.14159265358979323846;

/// A = I, U = 0.
inline ModelSpec flat_model() {
    ModelSpec m;
    m.cutoff = 1;
    m.name = "flat";
    return m;
}

/// A = I, U = eps0 * cos(x1). Minimal orbit rides the ridge top x1 = 0.
inline ModelSpec ridge_model(double eps0 = 0.1) {
    ModelSpec m;
    m.potential = FourierSeries({{1, 0, eps0, 0.0}});
    m.cutoff = 1;
    m.name = "ridge";
    return m;
}

/// A = I, U = eps0 * cos(2 x1): two tied ridges at x1 = 0 and pi.
inline ModelSpec cos2_model(double eps0 = 0.1) {
    ModelSpec m;
    m.potential = FourierSeries({{2, 0, eps0, 0.0}});
    m.cutoff = 2;
    m.name = "cos2";
    return m;
}

/// q2(x) = ((1 + cos x)/2)^2 bump as a 3-term series, scaled, optionally
/// centered at pi.
inline std::vector<FourierTerm> q2_terms(double amp, bool at_pi) {
    double sgn = at_pi ? -1.0 : 1.0;
    return {{0, 0, amp * 0.375, 0.0},
            {1, 0, sgn * amp * 0.5, 0.0},
            {2, 0, amp * 0.125, 0.0}};
}

/// Two-ridge sweep benchmark:
///   U = a q2(x1) + b q2(x1 - pi) + c q2(x1 - pi) sin(x1) sin(x2).
/// The straight orbit on the ridge at x1 = 0 is exact (the coupling
/// vanishes to high order there); the lower ridge at x1 = pi is wavy, its
/// action gains fade as E grows, producing a single global-minimum
/// exchange near E ~ 0.9.
inline ModelSpec two_ridge_model(double a = 0.26, double b = 0.25, double c = 0.25) {
    std::vector<FourierTerm> terms = q2_terms(a, false);
    for (auto t : q2_terms(b, true))
        terms.push_back(t);
    // q2(x1-pi) sin(x1) = 5/16 sin x1 - 1/4 sin 2x1 + 1/16 sin 3x1,
    // then times sin(x2) via product-to-sum.
    const double w1 = 5.0 / 16.0, w2 = -0.25, w3 = 1.0 / 16.0;
    const double ws[3] = {w1, w2, w3};
    for (int k = 1; k <= 3; ++k) {
        double half = 0.5 * c * ws[k - 1];
        terms.push_back({k, -1, half, 0.0});
        terms.push_back({k, 1, -half, 0.0});
    }
    ModelSpec m;
    m.potential = FourierSeries(terms);
    m.cutoff = 3;
    m.name = "two-ridge";
    return m;
}

/// Randomized model for equivalence sweeps: gentle SPD wiggle on the
/// metric, a few low-mode potential terms. Always validates with
/// m_L >= 0.6 and max U <= 0.3 so E = 1 is supercritical.
inline ModelSpec random_model(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_int_distribution<int> mode(-2, 2);

    auto wiggle = [&](double amp, int nterms) {
        std::vector<FourierTerm> ts;
        for (int i = 0; i < nterms; ++i) {
            int k1 = mode(rng), k2 = mode(rng);
            if (k1 == 0 && k2 == 0)
                continue;
            ts.push_back({k1, k2, amp * unit(rng), amp * unit(rng)});
        }
        return ts;
    };

    ModelSpec m;
    auto a11 = wiggle(0.03, 2);
    a11.push_back({0, 0, 1.0, 0.0});
    auto a22 = wiggle(0.03, 2);
    a22.push_back({0, 0, 1.0, 0.0});
    m.a11 = FourierSeries(a11);
    m.a12 = FourierSeries(wiggle(0.02, 1));
    m.a22 = FourierSeries(a22);
    m.potential = FourierSeries(wiggle(0.05, 3));
    m.cutoff = 2;
    m.name = "random-" + std::to_string(seed);
    return m;
}

/// Fourth-order central difference of a scalar function.
template <typename F>
double diff4(F&& f, double x, double h) {
    return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12.0 * h);
}

template <typename F>
double diff4_second(F&& f, double x, double h) {
    return (-f(x + 2 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) -
            f(x - 2 * h)) / (12.0 * h * h);
}

} // namespace testutil
