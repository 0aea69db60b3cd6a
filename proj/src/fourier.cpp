#include "orbits/fourier.hpp"

#include "orbits/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace orbits {

double Sym2::min_eigenvalue() const {
    double mid = 0.5 * (a11 + a22);
    double rad = std::sqrt(0.25 * (a11 - a22) * (a11 - a22) + a12 * a12);
    return mid - rad;
}

Sym2 Sym2::inverse() const {
    double d = det();
    if (d == 0.0)
        raise(Err::Internal, "singular kinetic matrix");
    return {a22 / d, -a12 / d, a11 / d};
}

FourierSeries::FourierSeries(std::vector<FourierTerm> terms) {
    std::map<std::pair<int, int>, std::pair<double, double>> merged;
    for (auto t : terms) {
        if (t.k1 < 0 || (t.k1 == 0 && t.k2 < 0)) {
            t.k1 = -t.k1;
            t.k2 = -t.k2;
            t.s = -t.s;
        }
        if (t.k1 == 0 && t.k2 == 0)
            t.s = 0.0; // sin(0) contributes nothing
        auto& slot = merged[{t.k1, t.k2}];
        slot.first += t.c;
        slot.second += t.s;
    }
    terms_.reserve(merged.size());
    for (const auto& [k, cs] : merged) {
        if (cs.first == 0.0 && cs.second == 0.0)
            continue;
        terms_.push_back({k.first, k.second, cs.first, cs.second});
    }
}

FourierSeries FourierSeries::constant(double c) {
    if (c == 0.0)
        return {};
    return FourierSeries({{0, 0, c, 0.0}});
}

double FourierSeries::eval(double x1, double x2) const {
    double acc = 0.0;
    for (const auto& t : terms_) {
        double th = t.k1 * x1 + t.k2 * x2;
        acc += t.c * std::cos(th) + t.s * std::sin(th);
    }
    return acc;
}

double FourierSeries::deriv(int d1, int d2, double x1, double x2) const {
    double acc = 0.0;
    for (const auto& t : terms_) {
        double c = t.c, s = t.s;
        for (int i = 0; i < d1; ++i) {
            double nc = t.k1 * s, ns = -t.k1 * c;
            c = nc;
            s = ns;
        }
        for (int i = 0; i < d2; ++i) {
            double nc = t.k2 * s, ns = -t.k2 * c;
            c = nc;
            s = ns;
        }
        double th = t.k1 * x1 + t.k2 * x2;
        acc += c * std::cos(th) + s * std::sin(th);
    }
    return acc;
}

ScalarJet2 FourierSeries::jet2(double x1, double x2) const {
    ScalarJet2 j;
    for (const auto& t : terms_) {
        double th = t.k1 * x1 + t.k2 * x2;
        double co = std::cos(th), si = std::sin(th);
        double even = t.c * co + t.s * si;  // the term itself
        double odd = -t.c * si + t.s * co;  // its angular derivative
        j.v += even;
        j.d1 += t.k1 * odd;
        j.d2 += t.k2 * odd;
        j.d11 -= t.k1 * t.k1 * even;
        j.d12 -= t.k1 * t.k2 * even;
        j.d22 -= t.k2 * t.k2 * even;
    }
    return j;
}

int FourierSeries::max_mode() const {
    int k = 0;
    for (const auto& t : terms_)
        k = std::max({k, std::abs(t.k1), std::abs(t.k2)});
    return k;
}

FourierSeries FourierSeries::mirrored_x2() const {
    std::vector<FourierTerm> out = terms_;
    for (auto& t : out)
        t.k2 = -t.k2;
    return FourierSeries(std::move(out));
}

FourierSeries FourierSeries::plus(const FourierSeries& other, double scale) const {
    std::vector<FourierTerm> out = terms_;
    for (auto t : other.terms_) {
        t.c *= scale;
        t.s *= scale;
        out.push_back(t);
    }
    return FourierSeries(std::move(out));
}

bool FourierSeries::all_finite() const {
    for (const auto& t : terms_)
        if (!std::isfinite(t.c) || !std::isfinite(t.s))
            return false;
    return true;
}

const char* err_name(Err code) {
    switch (code) {
    case Err::Ok: return "ok";
    case Err::Config: return "config";
    case Err::Io: return "io";
    case Err::OutsideEnergyShell: return "outside-energy-shell";
    case Err::BranchViolation: return "branch-violation";
    case Err::MomentumSolveFailure: return "momentum-solve-failure";
    case Err::NewtonDivergence: return "newton-divergence";
    case Err::BvpNonConvergence: return "bvp-non-convergence";
    case Err::StripExit: return "strip-exit";
    case Err::EnergyDriftExceeded: return "energy-drift-exceeded";
    case Err::NotClosed: return "not-closed";
    case Err::NoMinimumFound: return "no-minimum-found";
    case Err::StepFailure: return "step-failure";
    case Err::NonUniqueMinimizer: return "non-unique-minimizer";
    case Err::CriterionDisagreement: return "criterion-disagreement";
    case Err::AuditMismatch: return "audit-mismatch";
    case Err::Internal: return "internal";
    }
    return "unknown";
}

int exit_code_for(Err code) {
    switch (code) {
    case Err::Ok: return 0;
    case Err::Config: return 2;
    case Err::Io: return 3;
    case Err::Internal: return 1;
    default: return 4;
    }
}

} // namespace orbits
