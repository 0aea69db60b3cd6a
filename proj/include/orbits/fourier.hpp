#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace orbits {

using Vec2 = std::array<double, 2>;

/// Symmetric 2x2 matrix in packed form.
struct Sym2 {
    double a11 = 0.0, a12 = 0.0, a22 = 0.0;

    double det() const { return a11 * a22 - a12 * a12; }
    double trace() const { return a11 + a22; }
    double min_eigenvalue() const;
    Sym2 inverse() const;
    Vec2 mul(const Vec2& v) const {
        return {a11 * v[0] + a12 * v[1], a12 * v[0] + a22 * v[1]};
    }
    double quad(const Vec2& v) const {
        return a11 * v[0] * v[0] + 2.0 * a12 * v[0] * v[1] + a22 * v[1] * v[1];
    }
};

/// One term c*cos(k1*x1 + k2*x2) + s*sin(k1*x1 + k2*x2).
struct FourierTerm {
    int k1 = 0;
    int k2 = 0;
    double c = 0.0;
    double s = 0.0;
};

/// Value plus partial derivatives up to second order of a scalar field.
struct ScalarJet2 {
    double v = 0.0;
    double d1 = 0.0, d2 = 0.0;
    double d11 = 0.0, d12 = 0.0, d22 = 0.0;
};

/// Sparse real trigonometric polynomial on the 2-torus (period 2*pi in both
/// coordinates). Terms are canonicalized (k lexicographically nonnegative,
/// duplicates merged, exact zeros dropped) at construction.
class FourierSeries {
public:
    FourierSeries() = default;
    explicit FourierSeries(std::vector<FourierTerm> terms);

    static FourierSeries constant(double c);

    double eval(double x1, double x2) const;

    /// Mixed partial d^(d1+d2) f / dx1^d1 dx2^d2, derivative orders >= 0.
    double deriv(int d1, int d2, double x1, double x2) const;

    /// Value and all partials through second order in one pass.
    ScalarJet2 jet2(double x1, double x2) const;

    /// Largest |k1| or |k2| over stored terms (0 for constants/empty).
    int max_mode() const;

    bool empty() const { return terms_.empty(); }
    const std::vector<FourierTerm>& terms() const { return terms_; }

    /// Composition with x2 -> -x2 (used by the mirrored orientation).
    FourierSeries mirrored_x2() const;

    /// this + scale * other.
    FourierSeries plus(const FourierSeries& other, double scale) const;

    bool all_finite() const;

private:
    std::vector<FourierTerm> terms_;
};

} // namespace orbits
