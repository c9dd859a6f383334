#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "caustica/error.hpp"

namespace caustica {

template <class Real>
struct Vec2T {
    Real x{}, y{};

    Vec2T operator+(const Vec2T& o) const { return {x + o.x, y + o.y}; }
    Vec2T operator-(const Vec2T& o) const { return {x - o.x, y - o.y}; }
    Vec2T operator-() const { return {-x, -y}; }
    Vec2T operator*(const Real& k) const { return {x * k, y * k}; }
    Real dot(const Vec2T& o) const { return x * o.x + y * o.y; }
    Real cross(const Vec2T& o) const { return x * o.y - y * o.x; }
    Real norm() const {
        using std::sqrt;
        return sqrt(x * x + y * y);
    }
    Vec2T unit() const { return *this * (Real(1) / norm()); }
};

using Vec2 = Vec2T<double>;

inline constexpr double kDegeneracyTol = 1e-9;
inline constexpr double kBoundaryTol = 1e-9;
inline constexpr double kInfiniteSlope = std::numeric_limits<double>::infinity();

enum class CausticKind { Hyperbolic, Elliptic, DegenerateFocal, DegenerateBoundary, DegenerateCenter };

std::string to_string(CausticKind k);

struct CausticParam {
    double s = 0;
    CausticKind kind = CausticKind::DegenerateCenter;

    bool degenerate() const {
        return kind != CausticKind::Hyperbolic && kind != CausticKind::Elliptic;
    }
};

// Billiard table x^2 + y^2/(1-c^2) = 1 with foci (+-c, 0).
class Ellipse {
public:
    explicit Ellipse(double c);

    double c() const { return c_; }
    double c2() const { return c_ * c_; }
    double b2() const { return 1.0 - c_ * c_; }  // squared minor semi-axis
    double b() const { return std::sqrt(b2()); }

    // x^2 + y^2/b^2 - 1: negative inside, zero on the boundary.
    double residual(const Vec2& p) const { return p.x * p.x + p.y * p.y / b2() - 1.0; }
    bool on_boundary(const Vec2& p, double tol = kBoundaryTol) const {
        return std::abs(residual(p)) <= tol;
    }
    bool in_table(const Vec2& p, double tol = kBoundaryTol) const { return residual(p) <= tol; }
    Vec2 point_at(double eccentric_anomaly) const {
        return {std::cos(eccentric_anomaly), b() * std::sin(eccentric_anomaly)};
    }
    Vec2 outward_normal(const Vec2& q) const { return Vec2{q.x, q.y / b2()}.unit(); }

private:
    double c_;
};

struct PhasePoint {
    Vec2 p;  // boundary point
    Vec2 v;  // unit direction of the segment leaving p
};

struct Shot {
    Vec2 p;  // anywhere in the closed table
    Vec2 v;
};

struct Trajectory {
    std::vector<PhasePoint> states;
    CausticParam caustic;
};

CausticParam classify_caustic(const Ellipse& e, double s, double tol = kDegeneracyTol);

// Confocal parameter of the caustic tangent to the line through p along v:
// s = c^2 v_x^2 + (p x v)^2 for unit v.
template <class Real>
Real caustic_value(const Real& c2, const Vec2T<Real>& p, const Vec2T<Real>& v) {
    Real cr = p.cross(v);
    return (c2 * v.x * v.x + cr * cr) / v.dot(v);
}

// slope = +-infinity selects the vertical line x = p.x.
CausticParam caustic_of_line(const Ellipse& e, const Vec2& p, double slope);
CausticParam caustic_of_direction(const Ellipse& e, const Vec2& p, const Vec2& v);

Vec2 reflect(const Ellipse& e, const Vec2& q, const Vec2& v_in);

// Far intersection of the ray p + t v (t > 0) with the boundary.  Returns p
// itself when the ray only grazes the boundary at p.
template <class Real>
Vec2T<Real> chord_end(const Real& b2, const Vec2T<Real>& p, const Vec2T<Real>& v, bool* grazing = nullptr) {
    using std::abs;
    using std::sqrt;
    Real A = v.x * v.x + v.y * v.y / b2;
    Real B = 2 * (p.x * v.x + p.y * v.y / b2);
    Real C = p.x * p.x + p.y * p.y / b2 - 1;
    Real disc = B * B - 4 * A * C;
    if (disc < 0) disc = 0;
    Real sq = sqrt(disc);
    Real q = B < 0 ? (sq - B) / 2 : -(B + sq) / 2;
    Real t1 = q / A;
    Real t2 = q != 0 ? C / q : Real(0);
    Real t = t1 > t2 ? t1 : t2;
    if (grazing) *grazing = abs(t) < Real(1e-12) * sqrt(A);
    if (t <= 0) return p;
    return p + v * t;
}

template <class Real>
Vec2T<Real> reflect_t(const Real& b2, const Vec2T<Real>& q, const Vec2T<Real>& v) {
    Vec2T<Real> n = Vec2T<Real>{q.x, q.y / b2}.unit();
    Vec2T<Real> out = v - n * (2 * v.dot(n));
    return out.unit();
}

template <class Real>
struct PhasePointT {
    Vec2T<Real> p, v;
};

// One bounce at arbitrary precision; the double overload below is the
// checked public entry point.
template <class Real>
PhasePointT<Real> advance_t(const Real& b2, const PhasePointT<Real>& x) {
    Vec2T<Real> q = chord_end(b2, x.p, x.v);
    return {q, reflect_t(b2, q, x.v)};
}

PhasePoint advance(const Ellipse& e, const PhasePoint& x);
bool is_grazing(const Ellipse& e, const PhasePoint& x);

// The same chord traversed backwards: (far endpoint, -v).
PhasePoint time_reverse(const Ellipse& e, const PhasePoint& x);

// First boundary hit of the shot, with the reflected direction.
PhasePoint first_bounce(const Ellipse& e, const Shot& sh);

Trajectory simulate(const Ellipse& e, const Shot& sh, int n);

double phase_invariant(const Ellipse& e, const PhasePoint& x);

// Residual of the tangency condition for the line through q1, q2 and the
// caustic s, written as s*n_x^2 + (s - c^2)*n_y^2 = d^2 with unit normal n and
// offset d.  For lines missing the origin this is the dual-conic equation
// s t^2 + (s-c^2) u^2 = 1 multiplied by d^2.
double tangency_residual(const Ellipse& e, double s, const Vec2& q1, const Vec2& q2);

// Intersections (+-x0, +-y0) of the boundary with the caustic.  y0 is
// imaginary for elliptic caustics.
struct RamificationPoints {
    std::complex<double> x0, y0;
    bool real = false;
    // P1=(x0,y0), P2=(-x0,y0), P3=(x0,-y0), P4=(-x0,-y0)
    std::array<std::array<std::complex<double>, 2>, 4> points() const;
};

RamificationPoints boundary_caustic_intersection(const Ellipse& e, const CausticParam& s);

// Inward unit directions at the boundary point q whose lines touch the
// caustic s.  Empty when q is outside the arc reachable by that caustic.
std::vector<Vec2> tangent_directions(const Ellipse& e, double s, const Vec2& q);

// The tangent direction circulating counterclockwise (q x v > 0) or
// clockwise around the origin; elliptic caustics only.
Vec2 circulating_direction(const Ellipse& e, double s, const Vec2& q, bool counterclockwise);

// Rational parameter z = y/(x-1); +infinity at (1,0).
double rational_parameter(const Vec2& p);
Vec2 point_from_rational_parameter(const Ellipse& e, double z);

// Normalized density of the billiard-invariant measure in the z chart.
double invariant_density(const Ellipse& e, const CausticParam& s, double z);
// Invariant measure of the z-interval [z1, z2] (both admissible, same
// component for hyperbolic caustics).
double invariant_measure(const Ellipse& e, const CausticParam& s, double z1, double z2);

// Eccentric anomaly of a boundary point, in (-pi, pi].
inline double boundary_angle(const Ellipse& e, const Vec2& q) { return std::atan2(q.y / e.b(), q.x); }

}  // namespace caustica
