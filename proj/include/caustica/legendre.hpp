#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>

#include "caustica/conics.hpp"

namespace caustica {

using cplx = std::complex<double>;

// Affine point on Y^2 = X(X-1)(X-lambda), or the neutral point at infinity.
struct LegendrePoint {
    bool inf = true;
    cplx x{}, y{};

    static LegendrePoint infinity() { return {}; }
    static LegendrePoint affine(cplx x, cplx y) { return {false, x, y}; }
    LegendrePoint operator-() const { return inf ? *this : affine(x, -y); }
};

class LegendreCurve {
public:
    explicit LegendreCurve(cplx lambda);
    cplx lambda() const { return lambda_; }
    cplx rhs(cplx x) const { return x * (x - 1.0) * (x - lambda_); }
    // |Y^2 - f(X)| relative to the size of the terms.
    double residual(const LegendrePoint& P) const;
    bool contains(const LegendrePoint& P, double rel_tol = 1e-8) const;

private:
    cplx lambda_;
};

LegendreCurve lambda_of(const Ellipse& e, const CausticParam& s);

LegendrePoint add(const LegendreCurve& L, const LegendrePoint& P, const LegendrePoint& Q);
LegendrePoint mul(const LegendreCurve& L, long long n, const LegendrePoint& P);

// Distance in the affine chart, or in the chart at infinity (X/Y, 1/Y) when
// that is smaller.
double point_distance(const LegendrePoint& P, const LegendrePoint& Q);

// B(lambda) = (h, k): translation realizing one bounce.  Real range only.
LegendrePoint billiard_section(const Ellipse& e, double lambda);
// Constant-abscissa section (1/c^2, positive root).
LegendrePoint masser_point(const Ellipse& e, double lambda);
// B = M + (lambda, 0) on both sides of lambda = 1.

LegendrePoint phase_to_legendre(const Ellipse& e, const CausticParam& s, const PhasePoint& x);

// Pins the sign of the translation per caustic on first use.
class ConjugationChecker {
public:
    explicit ConjugationChecker(Ellipse e) : e_(e) {}
    double defect(const CausticParam& s, const PhasePoint& x);
    std::optional<int> sign_for(double s) const;

private:
    Ellipse e_;
    std::map<double, int> pinned_;
};

// One-shot version: both signs tried, the smaller defect returned.
double conjugation_defect(const Ellipse& e, const CausticParam& s, const PhasePoint& x, int* sign_used = nullptr);

// Image (x0', y0') of the base ramification point under the second
// involution; lies on the boundary.
std::array<cplx, 2> iota_images(const Ellipse& e, const CausticParam& s);

cplx j_invariant(const LegendreCurve& L);

std::string to_json(const LegendrePoint& P);

}  // namespace caustica
