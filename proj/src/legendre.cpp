#include "caustica/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace caustica {

namespace {

constexpr double kChordSwitch = 1e-8;

double scale_of(cplx a, cplx b) { return std::max({1.0, std::abs(a), std::abs(b)}); }

void require_real_range(const Ellipse& e, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0 / e.c2()) || lambda == 1.0)
        throw PreconditionError("bad-lambda", "lambda outside the real billiard range (0, 1/c^2) minus {1}");
}

}  // namespace

LegendreCurve::LegendreCurve(cplx lambda) : lambda_(lambda) {
    if (std::abs(lambda) < 1e-15 || std::abs(lambda - 1.0) < 1e-15)
        throw PreconditionError("bad-lambda", "Legendre parameter must avoid 0 and 1");
}

double LegendreCurve::residual(const LegendrePoint& P) const {
    if (P.inf) return 0.0;
    cplx lhs = P.y * P.y, r = rhs(P.x);
    double sc = std::max({1.0, std::abs(lhs), std::abs(r), std::pow(std::abs(P.x), 3)});
    return std::abs(lhs - r) / sc;
}

bool LegendreCurve::contains(const LegendrePoint& P, double rel_tol) const { return residual(P) <= rel_tol; }

LegendreCurve lambda_of(const Ellipse& e, const CausticParam& s) {
    if (s.degenerate())
        throw PreconditionError("degenerate-caustic", "bad reduction: caustic is " + to_string(s.kind));
    return LegendreCurve(s.s / e.c2());
}

LegendrePoint add(const LegendreCurve& L, const LegendrePoint& P, const LegendrePoint& Q) {
    if (!L.contains(P) || !L.contains(Q)) throw PreconditionError("off-curve", "point is not on the Legendre curve");
    if (P.inf) return Q;
    if (Q.inf) return P;
    const cplx a2 = -(1.0 + L.lambda()), a4 = L.lambda();
    cplx m;
    double sc = scale_of(P.x, Q.x);
    if (std::abs(P.x - Q.x) < kChordSwitch * sc) {
        if (std::abs(P.y + Q.y) < kChordSwitch * scale_of(P.y, Q.y)) return LegendrePoint::infinity();
        cplx y = 0.5 * (P.y + Q.y), x = 0.5 * (P.x + Q.x);
        m = (3.0 * x * x + 2.0 * a2 * x + a4) / (2.0 * y);
    } else {
        m = (Q.y - P.y) / (Q.x - P.x);
    }
    cplx x3 = m * m - a2 - P.x - Q.x;
    cplx y3 = -(P.y + m * (x3 - P.x));
    return LegendrePoint::affine(x3, y3);
}

LegendrePoint mul(const LegendreCurve& L, long long n, const LegendrePoint& P) {
    if (!L.contains(P)) throw PreconditionError("off-curve", "point is not on the Legendre curve");
    if (n < 0) return -mul(L, -n, P);
    LegendrePoint acc = LegendrePoint::infinity(), base = P;
    while (n > 0) {
        if (n & 1) acc = add(L, acc, base);
        n >>= 1;
        if (n) base = add(L, base, base);
    }
    return acc;
}

double point_distance(const LegendrePoint& P, const LegendrePoint& Q) {
    if (P.inf && Q.inf) return 0.0;
    auto at_inf = [](const LegendrePoint& R) -> std::array<cplx, 2> {
        if (R.inf) return {0.0, 0.0};
        return {R.x / R.y, 1.0 / R.y};
    };
    auto a = at_inf(P), b = at_inf(Q);
    double d_inf = std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]);
    if (P.inf || Q.inf) return d_inf;
    double d_aff = std::abs(P.x - Q.x) + std::abs(P.y - Q.y);
    if (!std::isfinite(d_inf)) return d_aff;
    return std::min(d_aff, d_inf);
}

LegendrePoint billiard_section(const Ellipse& e, double lambda) {
    require_real_range(e, lambda);
    double c = e.c(), c2 = e.c2(), s = c2 * lambda;
    double h = (1.0 - c2) * lambda / (1.0 - c2 * lambda);
    double k = c * std::sqrt(1.0 - c2) * lambda * (1.0 - lambda) / ((1.0 - s) * std::sqrt(1.0 - s));
    return LegendrePoint::affine(h, k);
}

LegendrePoint masser_point(const Ellipse& e, double lambda) {
    require_real_range(e, lambda);
    double c = e.c(), c2 = e.c2();
    return LegendrePoint::affine(1.0 / c2, std::sqrt(1.0 - c2) / (c2 * c) * std::sqrt(1.0 - c2 * lambda));
}

LegendrePoint phase_to_legendre(const Ellipse& e, const CausticParam& s, const PhasePoint& x) {
    RamificationPoints rp = boundary_caustic_intersection(e, s);
    const cplx x0 = rp.x0, y0 = rp.y0;
    const double c = e.c(), c2 = e.c2(), b2 = e.b2(), b = e.b(), sv = s.s, lambda = sv / c2;
    const Vec2 q = x.p, v = x.v;

    // Homography sending the ramification points to lambda, 0, 1, infinity,
    // and the quadratic factor (z^2 + b^2)/(z - z4)^2, both evaluated in the
    // chart that stays finite near q.
    const cplx z4 = y0 / (x0 + 1.0);
    cplx num, den, ratio;
    if (q.x > 0) {
        double u = -q.y / (b2 * (1.0 + q.x));  // 1/z
        num = (x0 + 1.0) + y0 * u;
        den = (x0 + 1.0) - y0 * u;
        cplx t = 1.0 - z4 * u;
        ratio = (1.0 + b2 * u * u) / (t * t);
    } else {
        double z = q.y / (q.x - 1.0);
        num = (x0 + 1.0) * z + y0;
        den = (x0 + 1.0) * z - y0;
        cplx t = z - z4;
        ratio = (z * z + b2) / (t * t);
    }
    if (std::abs(den) < 1e-14 * std::max(1.0, std::abs(num))) return LegendrePoint::infinity();
    cplx X = x0 * num / den;

    // The tangent-line branch: g = G/y with G^2 the discriminant quarter of
    // the dual quadratic; magnitude from the closed form, sign from the line.
    Vec2 n{-v.y, v.x};
    double d = n.dot(q);
    double mag = c * std::sqrt(1.0 - sv) * std::sqrt(std::max(0.0, lambda - q.x * q.x));
    double signed_num = n.x * sv * q.y - (sv - c2) * q.x * n.y;
    double g = (signed_num * d >= 0 ? 1.0 : -1.0) * mag;
    if (d == 0.0 && signed_num == 0.0) g = mag;

    cplx w = g * b * ratio / (c * y0);
    cplx Y = -x0 * (x0 - 1.0) * w / std::sqrt(1.0 - sv);
    return LegendrePoint::affine(X, Y);
}

double conjugation_defect(const Ellipse& e, const CausticParam& s, const PhasePoint& x, int* sign_used) {
    LegendreCurve L = lambda_of(e, s);
    LegendrePoint B = billiard_section(e, L.lambda().real());
    LegendrePoint P = phase_to_legendre(e, s, x);
    LegendrePoint P1 = phase_to_legendre(e, s, advance(e, x));
    double dp = point_distance(P1, add(L, P, B));
    double dm = point_distance(P1, add(L, P, -B));
    if (sign_used) *sign_used = dp <= dm ? 1 : -1;
    return std::min(dp, dm);
}

double ConjugationChecker::defect(const CausticParam& s, const PhasePoint& x) {
    auto it = pinned_.find(s.s);
    if (it == pinned_.end()) {
        int sign = 1;
        double d = conjugation_defect(e_, s, x, &sign);
        pinned_.emplace(s.s, sign);
        return d;
    }
    LegendreCurve L = lambda_of(e_, s);
    LegendrePoint B = billiard_section(e_, L.lambda().real());
    if (it->second < 0) B = -B;
    LegendrePoint P = phase_to_legendre(e_, s, x);
    LegendrePoint P1 = phase_to_legendre(e_, s, advance(e_, x));
    return point_distance(P1, add(L, P, B));
}

std::optional<int> ConjugationChecker::sign_for(double s) const {
    auto it = pinned_.find(s);
    if (it == pinned_.end()) return std::nullopt;
    return it->second;
}

std::array<cplx, 2> iota_images(const Ellipse& e, const CausticParam& s) {
    RamificationPoints rp = boundary_caustic_intersection(e, s);
    double c2 = e.c2(), sv = s.s;
    double den = 1.0 + (c2 - 2.0) * sv;
    if (std::abs(den) < 1e-14) throw PreconditionError("degenerate-caustic", "vanishing denominator");
    return {rp.x0 * (1.0 - 2.0 * c2 + c2 * sv) / den, rp.y0 * (1.0 - c2 * sv) / den};
}

cplx j_invariant(const LegendreCurve& L) {
    cplx l = L.lambda();
    cplx t = l * l - l + 1.0;
    return 256.0 * t * t * t / (l * l * (1.0 - l) * (1.0 - l));
}

std::string to_json(const LegendrePoint& P) {
    nlohmann::json j;
    if (P.inf) {
        j["inf"] = true;
    } else if (P.x.imag() == 0.0 && P.y.imag() == 0.0) {
        j["x"] = P.x.real();
        j["y"] = P.y.real();
    } else {
        j["x"] = {P.x.real(), P.x.imag()};
        j["y"] = {P.y.real(), P.y.imag()};
    }
    return j.dump();
}

}  // namespace caustica
