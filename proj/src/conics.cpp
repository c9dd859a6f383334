#include "caustica/conics.hpp"

#include <algorithm>
#include <cmath>

#include "quadrature.hpp"

namespace caustica {

std::string to_string(CausticKind k) {
    switch (k) {
        case CausticKind::Hyperbolic: return "hyperbolic";
        case CausticKind::Elliptic: return "elliptic";
        case CausticKind::DegenerateFocal: return "degenerate-focal";
        case CausticKind::DegenerateBoundary: return "degenerate-boundary";
        case CausticKind::DegenerateCenter: return "degenerate-center";
    }
    return "unknown";
}

Ellipse::Ellipse(double c) : c_(c) {
    if (!(c > 0.0 && c < 1.0))
        throw PreconditionError("bad-ellipse", "focal parameter c must lie in (0,1)");
}

CausticParam classify_caustic(const Ellipse& e, double s, double tol) {
    CausticParam out{s, CausticKind::Hyperbolic};
    if (std::abs(s - e.c2()) < tol * e.c2())
        out.kind = CausticKind::DegenerateFocal;
    else if (std::abs(s - 1.0) < tol || s > 1.0)
        out.kind = CausticKind::DegenerateBoundary;
    else if (std::abs(s) < tol || s < 0.0)
        out.kind = CausticKind::DegenerateCenter;
    else if (s < e.c2())
        out.kind = CausticKind::Hyperbolic;
    else
        out.kind = CausticKind::Elliptic;
    return out;
}

CausticParam caustic_of_line(const Ellipse& e, const Vec2& p, double slope) {
    if (std::isinf(slope)) return classify_caustic(e, p.x * p.x);
    double s = (e.c2() + (slope * p.x - p.y) * (slope * p.x - p.y)) / (slope * slope + 1.0);
    return classify_caustic(e, s);
}

CausticParam caustic_of_direction(const Ellipse& e, const Vec2& p, const Vec2& v) {
    return classify_caustic(e, caustic_value(e.c2(), p, v));
}

static void require_boundary(const Ellipse& e, const Vec2& q) {
    if (!e.on_boundary(q, 1e-8))
        throw PreconditionError("off-boundary", "point is not on the boundary ellipse");
}

Vec2 reflect(const Ellipse& e, const Vec2& q, const Vec2& v_in) {
    require_boundary(e, q);
    return reflect_t(e.b2(), q, v_in.unit());
}

PhasePoint advance(const Ellipse& e, const PhasePoint& x) {
    bool grazing = false;
    Vec2 q = chord_end(e.b2(), x.p, x.v, &grazing);
    if (grazing) return x;
    return {q, reflect_t(e.b2(), q, x.v)};
}

bool is_grazing(const Ellipse& e, const PhasePoint& x) {
    bool grazing = false;
    chord_end(e.b2(), x.p, x.v, &grazing);
    return grazing;
}

PhasePoint time_reverse(const Ellipse& e, const PhasePoint& x) {
    return {chord_end(e.b2(), x.p, x.v), -x.v};
}

PhasePoint first_bounce(const Ellipse& e, const Shot& sh) {
    if (!e.in_table(sh.p)) throw PreconditionError("outside-table", "shot origin lies outside the table");
    Vec2 v = sh.v.unit();
    Vec2 q = chord_end(e.b2(), sh.p, v);
    return {q, reflect_t(e.b2(), q, v)};
}

Trajectory simulate(const Ellipse& e, const Shot& sh, int n) {
    if (n < 1) throw PreconditionError("bad-count", "bounce count must be >= 1");
    Trajectory t;
    t.caustic = caustic_of_direction(e, sh.p, sh.v.unit());
    t.states.reserve(static_cast<size_t>(n));
    PhasePoint x = first_bounce(e, sh);
    t.states.push_back(x);
    for (int i = 1; i < n; ++i) {
        x = advance(e, x);
        t.states.push_back(x);
    }
    return t;
}

double phase_invariant(const Ellipse& e, const PhasePoint& x) {
    return e.b2() * x.p.x * x.v.x + x.p.y * x.v.y;
}

double tangency_residual(const Ellipse& e, double s, const Vec2& q1, const Vec2& q2) {
    Vec2 dir = (q2 - q1).unit();
    Vec2 n{-dir.y, dir.x};
    double d = n.dot(q1);
    return s * n.x * n.x + (s - e.c2()) * n.y * n.y - d * d;
}

std::array<std::array<std::complex<double>, 2>, 4> RamificationPoints::points() const {
    return {{{x0, y0}, {-x0, y0}, {x0, -y0}, {-x0, -y0}}};
}

RamificationPoints boundary_caustic_intersection(const Ellipse& e, const CausticParam& s) {
    if (s.degenerate())
        throw PreconditionError("degenerate-caustic", "caustic is " + to_string(s.kind));
    RamificationPoints r;
    double x02 = s.s / e.c2();
    double y02 = e.b2() * (e.c2() - s.s) / e.c2();
    r.x0 = std::sqrt(x02);
    r.y0 = std::sqrt(std::complex<double>(y02, 0.0));
    r.real = y02 > 0;
    return r;
}

std::vector<Vec2> tangent_directions(const Ellipse& e, double s, const Vec2& q) {
    // Inward directions v satisfy (1-c^2) x v1 + y v2 = -sqrt((1-c^2)(1-s)).
    double A = e.b2() * q.x, B = q.y;
    double g = std::hypot(A, B);
    double K = -std::sqrt(e.b2() * (1.0 - s));
    double ratio = K / g;
    if (ratio < -1.0 - 1e-12 || ratio > 1.0 + 1e-12) return {};
    ratio = std::clamp(ratio, -1.0, 1.0);
    double base = std::atan2(B, A), spread = std::acos(ratio);
    return {{std::cos(base + spread), std::sin(base + spread)},
            {std::cos(base - spread), std::sin(base - spread)}};
}

Vec2 circulating_direction(const Ellipse& e, double s, const Vec2& q, bool counterclockwise) {
    auto dirs = tangent_directions(e, s, q);
    if (dirs.empty()) throw PreconditionError("not-admissible", "no tangent to the caustic from this point");
    for (const auto& v : dirs)
        if ((q.cross(v) > 0) == counterclockwise) return v;
    return dirs.front();
}

double rational_parameter(const Vec2& p) {
    if (p.x == 1.0) return std::numeric_limits<double>::infinity();
    return p.y / (p.x - 1.0);
}

Vec2 point_from_rational_parameter(const Ellipse& e, double z) {
    if (std::isinf(z)) return {1.0, 0.0};
    double b2 = e.b2();
    double den = z * z + b2;
    return {(z * z - b2) / den, -2.0 * z * b2 / den};
}

namespace {

struct DensityData {
    double alpha2, beta2;  // y0^2/(x0+1)^2 and y0^2/(x0-1)^2
    bool elliptic;
};

DensityData density_data(const Ellipse& e, const CausticParam& s) {
    if (s.degenerate())
        throw PreconditionError("degenerate-caustic", "caustic is " + to_string(s.kind));
    double x0 = std::sqrt(s.s / e.c2());
    double y02 = e.b2() * (e.c2() - s.s) / e.c2();
    return {y02 / ((x0 + 1) * (x0 + 1)), y02 / ((x0 - 1) * (x0 - 1)), s.kind == CausticKind::Elliptic};
}

double raw_density(const DensityData& d, double z) {
    double z2 = z * z;
    return 1.0 / std::sqrt(std::abs((z2 - d.alpha2) * (z2 - d.beta2)));
}

// Integral of the unnormalized density over [z1, z2] inside one admissible
// component.
double raw_measure(const DensityData& d, double z1, double z2) {
    if (z1 == z2) return 0.0;
    if (z1 > z2) return -raw_measure(d, z2, z1);
    auto f = [&](double z) { return raw_density(d, z); };
    if (d.elliptic) return detail::integrate_smooth(f, z1, z2, 1e-13);
    return detail::integrate_endpoint_singular(f, z1, z2, 1e-13);
}

double total_raw_measure(const DensityData& d) {
    if (d.elliptic) return 2.0 * raw_measure(d, 0.0, std::numeric_limits<double>::infinity());
    return 2.0 * raw_measure(d, std::sqrt(d.alpha2), std::sqrt(d.beta2));
}

}  // namespace

double invariant_density(const Ellipse& e, const CausticParam& s, double z) {
    DensityData d = density_data(e, s);
    double z2 = z * z;
    double rad = (z2 - d.alpha2) * (z2 - d.beta2);
    if (rad == 0.0) throw PreconditionError("singular-endpoint", "z is a zero of the density radicand");
    if (!d.elliptic && rad > 0.0) throw PreconditionError("not-admissible", "z outside the admissible arc");
    return raw_density(d, z) / total_raw_measure(d);
}

double invariant_measure(const Ellipse& e, const CausticParam& s, double z1, double z2) {
    DensityData d = density_data(e, s);
    return raw_measure(d, z1, z2) / total_raw_measure(d);
}

}  // namespace caustica
