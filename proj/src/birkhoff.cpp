#include "caustica/birkhoff.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/math/constants/constants.hpp>

#include "caustica/periods.hpp"

namespace caustica {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

void require_proper(const Ellipse& e, const PhasePoint& x) {
    if (!e.on_boundary(x.p, 1e-8)) throw PreconditionError("off-boundary", "phase point must sit on the boundary");
    // Axis orbits (focal or central caustic) are legitimate; grazing ones are not.
    if (caustic_of_direction(e, x.p, x.v).kind == CausticKind::DegenerateBoundary)
        throw PreconditionError("degenerate-caustic", "grazing trajectory has no proper bounces");
}

void require_odd_window(int n) {
    if (n < 1 || n % 2 == 0) throw PreconditionError("bad-window", "window length must be odd and positive");
}

void require_nondegenerate(const CausticParam& s) {
    if (s.degenerate()) throw PreconditionError("degenerate-caustic", "caustic must be an ellipse or a hyperbola");
}

double frac_gap(double x) { return std::abs(x - std::round(x)); }

}  // namespace

double h_weight(const Ellipse& e, const Vec2& p) {
    if (!e.on_boundary(p, 1e-8)) throw PreconditionError("off-boundary", "point must lie on the boundary");
    return 1.0 / (1.0 - e.c2() * p.x * p.x);
}

double bounce_cosine(const Ellipse& e, const PhasePoint& x) {
    Vec2 n = e.outward_normal(x.p);
    double vn = x.v.dot(n);
    return 1.0 - 2.0 * vn * vn;
}

double birkhoff_sum(const Ellipse& e, const PhasePoint& start, int n) {
    if (n < 0) throw PreconditionError("bad-count", "n must be non-negative");
    require_proper(e, start);
    double sum = 0;
    PhasePoint x = start;
    for (int i = 0; i < n; ++i) {
        x = advance(e, x);
        sum += bounce_cosine(e, x);
    }
    return sum;
}

PhasePoint retreat(const Ellipse& e, const PhasePoint& x) {
    Vec2 v_in = reflect_t(e.b2(), x.p, x.v);
    Vec2 q = chord_end(e.b2(), x.p, -v_in);
    return {q, v_in};
}

double symmetric_sum(const Ellipse& e, const PhasePoint& center, int m) {
    if (m < 0) throw PreconditionError("bad-count", "m must be non-negative");
    require_proper(e, center);
    PhasePoint x = center;
    for (int i = 0; i < m; ++i) x = retreat(e, x);
    double sum = bounce_cosine(e, x);
    for (int i = 0; i < 2 * m; ++i) {
        x = advance(e, x);
        sum += bounce_cosine(e, x);
    }
    return sum;
}

std::vector<PhasePoint> caustic_start(const Ellipse& e, const CausticParam& s, double t) {
    require_nondegenerate(s);
    Vec2 q = e.point_at(t);
    auto dirs = tangent_directions(e, s.s, q);
    if (dirs.empty()) return {};
    for (const auto& v : dirs)
        if (q.cross(v) > 0) return {{q, v}};
    return {{q, dirs.front()}};
}

std::vector<ProfileSample> symmetric_profile(const Ellipse& e, const CausticParam& s, int n, int samples) {
    require_odd_window(n);
    require_nondegenerate(s);
    if (samples < 1) throw PreconditionError("bad-count", "samples must be positive");
    // Hyperbolic caustics are reached only from the arcs |x| <= x0 around the
    // minor vertices; sample those arcs (half the points on each).
    double t0 = 0.0;
    if (s.kind == CausticKind::Hyperbolic) {
        double x0 = boundary_caustic_intersection(e, s).x0.real();
        t0 = std::acos(std::min(1.0, x0));
    }
    std::vector<ProfileSample> out;
    for (int j = 0; j < samples; ++j) {
        double t;
        if (s.kind == CausticKind::Hyperbolic) {
            int half = (samples + 1) / 2;
            int k = j % half;
            t = t0 + (kPi - 2.0 * t0) * (k + 0.5) / half + (j < half ? 0.0 : kPi);
        } else {
            t = 2.0 * kPi * j / samples;
        }
        auto st = caustic_start(e, s, t);
        if (st.empty()) continue;
        out.push_back({st[0].p.x, st[0].p.y, symmetric_sum(e, st[0], (n - 1) / 2)});
    }
    return out;
}

double periodicity_gap(const Ellipse& e, const CausticParam& s, int n) {
    require_nondegenerate(s);
    BettiCoords b = betti_billiard(e, s.s / e.c2());
    return std::max(frac_gap(n * b.beta1), frac_gap(n * b.beta2));
}

MoebiusFit moebius_fit(const Ellipse& e, const CausticParam& s, int n, int samples) {
    require_odd_window(n);
    if (samples < 5) throw PreconditionError("bad-count", "samples must be at least 5");
    if (periodicity_gap(e, s, n) < 1e-6)
        throw PreconditionError("periodic-caustic", "window sums are constant on a caustic periodic for this n");
    auto prof = symmetric_profile(e, s, n, samples);
    // Distinct t = x^2 abscissae for the exact 4-point solve.
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : prof) pts.push_back({p.x * p.x, p.sum});
    std::sort(pts.begin(), pts.end());
    std::vector<std::pair<double, double>> uniq;
    for (const auto& p : pts)
        if (uniq.empty() || p.first - uniq.back().first > 1e-9) uniq.push_back(p);
    if (uniq.size() < 4) throw PreconditionError("bad-count", "fewer than 4 distinct sample abscissae");
    double lo = pts.front().second, hi = lo;
    for (const auto& p : pts) {
        lo = std::min(lo, p.second);
        hi = std::max(hi, p.second);
    }
    if (hi - lo < 1e-9) throw PreconditionError("degenerate-fit", "window sums are numerically constant");

    const size_t k = uniq.size();
    std::array<size_t, 4> pick{0, k / 3, (2 * k) / 3, k - 1};
    // Rows [t, 1, -H t, -H] annihilate (a, b, c, d); null vector by full pivoting.
    std::array<std::array<double, 4>, 4> A{};
    for (size_t r = 0; r < 4; ++r) {
        auto [t, H] = uniq[pick[r]];
        A[r] = {t, 1.0, -H * t, -H};
    }
    std::array<int, 4> col{0, 1, 2, 3};
    for (int step = 0; step < 3; ++step) {
        int bi = step, bj = step;
        for (int i = step; i < 4; ++i)
            for (int j = step; j < 4; ++j)
                if (std::abs(A[i][j]) > std::abs(A[bi][bj])) {
                    bi = i;
                    bj = j;
                }
        std::swap(A[step], A[bi]);
        for (auto& row : A) std::swap(row[step], row[bj]);
        std::swap(col[step], col[bj]);
        for (int i = step + 1; i < 4; ++i) {
            double f = A[i][step] / A[step][step];
            for (int j = step; j < 4; ++j) A[i][j] -= f * A[step][j];
        }
    }
    std::array<double, 4> y{0, 0, 0, 1.0};
    for (int i = 2; i >= 0; --i) {
        double acc = 0;
        for (int j = i + 1; j < 4; ++j) acc += A[i][j] * y[j];
        y[i] = -acc / A[i][i];
    }
    std::array<double, 4> coef{};
    for (int i = 0; i < 4; ++i) coef[col[i]] = y[i];
    double norm = std::sqrt(coef[0] * coef[0] + coef[1] * coef[1] + coef[2] * coef[2] + coef[3] * coef[3]);
    double sgn = (coef[3] != 0 ? coef[3] : coef[2]) < 0 ? -1.0 : 1.0;
    MoebiusFit fit;
    fit.a = sgn * coef[0] / norm;
    fit.b = sgn * coef[1] / norm;
    fit.c = sgn * coef[2] / norm;
    fit.d = sgn * coef[3] / norm;
    fit.det = fit.a * fit.d - fit.b * fit.c;
    fit.samples = static_cast<int>(prof.size());
    for (const auto& p : pts) fit.residual = std::max(fit.residual, std::abs(fit.eval(p.first) - p.second));
    return fit;
}

ProfileExtrema profile_extrema(const Ellipse& e, const CausticParam& s, int n, int grid) {
    auto prof = symmetric_profile(e, s, n, grid);
    if (prof.empty()) throw PreconditionError("not-admissible", "caustic unreachable from the boundary samples");
    ProfileExtrema x;
    x.max = x.min = prof[0].sum;
    x.x_at_max = x.x_at_min = prof[0].x;
    for (const auto& p : prof) {
        if (p.sum > x.max) {
            x.max = p.sum;
            x.x_at_max = p.x;
        }
        if (p.sum < x.min) {
            x.min = p.sum;
            x.x_at_min = p.x;
        }
    }
    return x;
}

int value_multiplicity(const Ellipse& e, const CausticParam& s, int n, double value, int grid) {
    require_odd_window(n);
    require_nondegenerate(s);
    if (grid < 8) throw PreconditionError("bad-count", "grid must be at least 8");
    const int m = (n - 1) / 2;
    const double ztol = 1e-12 * std::max(1.0, std::abs(value));
    // g(t) on t in [0, pi]; the right end only brackets, it is not counted.
    auto g = [&](double t, bool& ok) {
        auto st = caustic_start(e, s, t);
        ok = !st.empty();
        return ok ? symmetric_sum(e, st[0], m) - value : 0.0;
    };
    std::vector<double> gv(static_cast<size_t>(grid) + 1);
    std::vector<char> okv(gv.size());
    for (int j = 0; j <= grid; ++j) {
        bool ok = false;
        gv[static_cast<size_t>(j)] = g(kPi * j / grid, ok);
        okv[static_cast<size_t>(j)] = ok;
    }
    int count = 0;
    bool in_zero = false;
    for (int j = 0; j < grid; ++j) {
        auto i = static_cast<size_t>(j);
        if (!okv[i]) {
            in_zero = false;
            continue;
        }
        if (std::abs(gv[i]) <= ztol) {
            if (!in_zero) ++count;
            in_zero = true;
            continue;
        }
        in_zero = false;
        if (okv[i + 1] && std::abs(gv[i + 1]) > ztol && (gv[i] < 0) != (gv[i + 1] < 0)) ++count;
    }
    return count;
}

}  // namespace caustica
