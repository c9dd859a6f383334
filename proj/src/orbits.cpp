#include "caustica/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <boost/math/constants/constants.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "bigfloat.hpp"
#include "caustica/periods.hpp"

namespace caustica {

namespace {

using detail::BigFloat;
using detail::PrecisionScope;

constexpr double kPi = boost::math::constants::pi<double>();
constexpr double kTwoPi = 2.0 * kPi;
// Smallest focal offset |lambda - 1| representable for the root search.
constexpr double kOffsetFloor = 1e-300;
constexpr int kMaxBits = 8192;

double wrap_angle(double t) {
    t = std::fmod(t, kTwoPi);
    if (t < 0) t += kTwoPi;
    if (t >= kTwoPi) t -= kTwoPi;
    return t;
}

void require_interior(const Ellipse& e, const Vec2& p) {
    if (!(e.residual(p) < -kBoundaryTol))
        throw PreconditionError("not-interior", "point must lie strictly inside the table");
}

bool is_focus(const Ellipse& e, const Vec2& p) {
    return std::abs(p.y) < 1e-12 && std::abs(std::abs(p.x) - e.c()) < 1e-12;
}

// Closure misfit of the shot (p, angle) after n bounces, at the precision of
// Real.  Also reports the signed offset of p from the final segment line.
template <class Real>
Real closure_t(const Real& b2, const Vec2T<Real>& p, const Vec2T<Real>& v, int n, Real* offset = nullptr) {
    using std::abs;
    PhasePointT<Real> x{chord_end(b2, p, v), v};
    x.v = reflect_t(b2, x.p, v);
    for (int i = 1; i < n; ++i) x = advance_t(b2, x);
    Real off = (p - x.p).cross(x.v);
    if (offset) *offset = off;
    Vec2T<Real> dv = x.v - v;
    return abs(off) + dv.norm();
}

template <class Real>
Vec2T<Real> direction_of(const Real& theta) {
    using std::cos;
    using std::sin;
    return {cos(theta), sin(theta)};
}

// Both roots of s(theta) = sigma as raw angles (phi +- acos r)/2.
template <class Real>
std::vector<Real> sinusoid_roots(const Real& a, const Real& b, const Real& c2, const Real& sigma) {
    using std::acos;
    using std::atan2;
    using std::sqrt;
    Real A = (a * a + b * b + c2) / 2;
    Real Rc = (c2 + b * b - a * a) / 2;
    Real Rs = -(a * b);
    Real R = sqrt(Rc * Rc + Rs * Rs);
    if (!(R > 0)) return {};
    Real r = (sigma - A) / R;
    if (r > 1.0 || r < -1.0) return {};
    Real phi = atan2(Rs, Rc);
    Real ac = acos(r);
    return {(phi + ac) / 2, (phi - ac) / 2};
}

double beta2_of_offset(const Ellipse& e, double eps, bool elliptic) {
    if (eps < 1e-3) return beta2_near_focal(e, eps, elliptic);
    return betti_billiard(e, elliptic ? 1.0 + eps : 1.0 - eps).beta2;
}

// Certifies the direction at angle theta0 (an approximation of a periodic
// direction at focal offset eps) and fills in the record.  Escalates from
// double to MPFR, refining theta by secant steps on the closure offset.
std::optional<PeriodicDirection> certify(const Ellipse& e, const Vec2& p, int n, double tol,
                                         double eps, bool elliptic, int root_index, int flip) {
    const double c = e.c();
    PeriodicDirection out;
    out.period = n;

    // Double attempt first.
    {
        double sigma = e.c2() * (elliptic ? 1.0 + eps : 1.0 - eps);
        auto roots = sinusoid_roots<double>(p.x, p.y, e.c2(), sigma);
        if (roots.size() == 2) {
            double th = roots[static_cast<size_t>(root_index)] + (flip ? kPi : 0.0);
            Vec2 v = direction_of(th);
            double err = closure_t<double>(e.b2(), p, v, n);
            // Marginal double certificates are redone at higher precision.
            if (err < 1e-3 * tol && std::isfinite(err)) {
                out.direction = v;
                out.angle = wrap_angle(th);
                out.closure_error = err;
                out.caustic = caustic_of_direction(e, p, v);
                return out;
            }
        }
    }

    long bits = std::max<long>(128, static_cast<long>(std::log2(1.0 / eps)) + 96);
    for (; bits <= kMaxBits; bits *= 2) {
        PrecisionScope scope(bits);
        BigFloat cc(c), c2 = cc * cc, b2 = BigFloat(1.0) - c2;
        BigFloat be(eps);
        BigFloat sigma = c2 * (elliptic ? BigFloat(1.0) + be : BigFloat(1.0) - be);
        BigFloat px(p.x), py(p.y);
        auto roots = sinusoid_roots<BigFloat>(px, py, c2, sigma);
        if (roots.size() != 2) return std::nullopt;
        BigFloat th = roots[static_cast<size_t>(root_index)];
        if (flip) th = th + BigFloat::pi();
        Vec2T<BigFloat> P{px, py};

        auto eval = [&](const BigFloat& t, BigFloat* off) { return closure_t<BigFloat>(b2, P, direction_of(t), n, off); };
        BigFloat off0;
        BigFloat err = eval(th, &off0);
        // The offset is linear in theta near the root; secant from a nearby
        // point whose step is set by the current misfit.
        if (!(err < tol)) {
            BigFloat t0 = th, f0 = off0;
            BigFloat t1 = th + BigFloat(std::ldexp(1.0, -static_cast<int>(bits / 2)));
            BigFloat f1;
            eval(t1, &f1);
            for (int it = 0; it < 60 && !(err < tol * 1e-3); ++it) {
                BigFloat den = f1 - f0;
                if (den == BigFloat(0.0)) break;
                BigFloat t2 = t1 - f1 * (t1 - t0) / den;
                t0 = t1;
                f0 = f1;
                t1 = t2;
                err = eval(t1, &f1);
            }
            th = t1;
        }
        if (err < tol) {
            double thd = th.to_double();
            out.direction = direction_of(thd);
            out.angle = wrap_angle(thd);
            out.closure_error = err.to_double();
            out.precision_bits = static_cast<int>(bits);
            out.angle_text = th.to_string();
            out.caustic = {sigma.to_double(), elliptic ? CausticKind::Elliptic : CausticKind::Hyperbolic};
            return out;
        }
    }
    return std::nullopt;
}

PeriodicDirection axis_direction(const Ellipse& e, const Vec2& p, Vec2 v, int n) {
    PeriodicDirection d;
    d.direction = v;
    d.period = n;
    d.angle = wrap_angle(std::atan2(v.y, v.x));
    d.closure_error = closure_t<double>(e.b2(), p, v, n);
    d.caustic = caustic_of_direction(e, p, v);
    return d;
}

}  // namespace

CausticExtrema caustic_extrema(const Ellipse& e, const Vec2& p) {
    require_interior(e, p);
    CausticSinusoid sn = caustic_sinusoid(e, p);
    CausticExtrema x;
    x.M = sn.A + sn.R;
    // Product of the roots is a^2 c^2; avoids cancellation in A - R.
    x.m = x.M > 0 ? p.x * p.x * e.c2() / x.M : 0.0;
    return x;
}

double CausticSinusoid::at(double theta) const { return A + R * std::cos(2.0 * theta - phi); }

std::vector<double> CausticSinusoid::solve(double sigma) const {
    std::vector<double> out;
    if (!(R > 0)) return out;
    double r = (sigma - A) / R;
    if (r > 1.0 || r < -1.0) return out;
    double ac = std::acos(r);
    for (double t : {(phi + ac) / 2, (phi - ac) / 2}) {
        t = std::fmod(t, kPi);
        if (t < 0) t += kPi;
        out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    if (out.size() == 2 && out[1] - out[0] < 1e-15) out.pop_back();
    return out;
}

CausticSinusoid caustic_sinusoid(const Ellipse& e, const Vec2& p) {
    const double a = p.x, b = p.y, c2 = e.c2();
    CausticSinusoid s;
    s.A = 0.5 * (a * a + b * b + c2);
    double rc = 0.5 * (c2 + b * b - a * a), rs = -a * b;
    s.R = std::hypot(rc, rs);
    s.phi = std::atan2(rs, rc);
    return s;
}

double total_variation_constant(const Ellipse& e, const Vec2& p, bool odd, int cells) {
    require_interior(e, p);
    if (cells < 16) throw PreconditionError("bad-count", "cells must be at least 16");
    CausticSinusoid sn = caustic_sinusoid(e, p);
    const double c2 = e.c2(), u = 1.0 / c2;
    const double beta_at_zero = std::atan(std::sqrt(u - 1.0)) / kPi;
    // beta2 is pi-periodic in theta: integrate over [0, pi) and double.
    // side: +1 elliptic, -1 hyperbolic, 0 not admissible.
    std::vector<double> beta(static_cast<size_t>(cells) + 1);
    std::vector<int> side(beta.size());
    for (int i = 0; i <= cells; ++i) {
        double lam = sn.at(kPi * i / cells) / c2;
        auto k = static_cast<size_t>(i);
        if (lam > 1.0 && lam < u) side[k] = 1;
        else if (!odd && lam < 1.0) side[k] = -1;
        if (std::abs(lam - 1.0) < 1e-300) side[k] = 0;
        if (side[k] == 0) continue;
        beta[k] = lam <= 0.0 ? beta_at_zero : beta2_of_offset(e, std::abs(lam - 1.0), lam > 1.0);
    }
    // beta2 -> 1/2 only logarithmically at a focal crossing, far too slowly
    // for the grid; such steps are closed with their exact limit instead.
    double tv = 0.0;
    for (size_t i = 0; i + 1 < beta.size(); ++i) {
        if (side[i] != 0 && side[i] == side[i + 1]) {
            tv += std::abs(beta[i + 1] - beta[i]);
            continue;
        }
        if (side[i] != 0) tv += 0.5 - beta[i];
        if (side[i + 1] != 0) tv += 0.5 - beta[i + 1];
    }
    return 2.0 * tv;
}

CountingConstants counting_constants(const Ellipse& e, const Vec2& p) {
    require_interior(e, p);
    if (is_focus(e, p)) throw PreconditionError("focal-point", "counting constants are undefined at a focus");
    CountingConstants k;
    const double c2 = e.c2();
    if (std::abs(p.x) > 1e-12 && std::abs(p.y) > 1e-12) {
        CausticExtrema x = caustic_extrema(e, p);
        auto beta_at = [&](double s, bool elliptic) {
            double eps = std::abs(s / c2 - 1.0);
            if (eps < 1e-300) return 0.5;
            return beta2_of_offset(e, eps, elliptic);
        };
        double bM = beta_at(x.M, true), bm = beta_at(x.m, false);
        k.odd = 2.0 - 4.0 * bM;
        k.even = 2.0 * (1.0 - bM - bm);
        k.closed_form = true;
        return k;
    }
    k.odd = total_variation_constant(e, p, true);
    k.even = total_variation_constant(e, p, false);
    return k;
}

double predicted_count(const Ellipse& e, const Vec2& p, int n) {
    if (n < 1) throw PreconditionError("bad-count", "n must be positive");
    CountingConstants k = counting_constants(e, p);
    return (n % 2 ? k.odd : k.even) * n;
}

double closure_error(const Ellipse& e, const Shot& sh, int n) {
    if (n < 1) throw PreconditionError("bad-count", "n must be positive");
    if (!e.in_table(sh.p)) throw PreconditionError("outside", "shot origin outside the table");
    return closure_t<double>(e.b2(), sh.p, sh.v.unit(), n);
}

double recertify(const Ellipse& e, const Vec2& p, const PeriodicDirection& d) {
    if (d.precision_bits <= 53 || d.angle_text.empty()) return closure_error(e, {p, d.direction}, d.period);
    PrecisionScope scope(d.precision_bits);
    BigFloat cc(e.c()), b2 = BigFloat(1.0) - cc * cc;
    BigFloat th = BigFloat::from_string(d.angle_text);
    Vec2T<BigFloat> P{BigFloat(p.x), BigFloat(p.y)};
    return closure_t<BigFloat>(b2, P, direction_of(th), d.period).to_double();
}

PeriodicSearch::PeriodicSearch(const Ellipse& e, const Vec2& p) : e_(e), p_(p) {
    if (!e.in_table(p)) throw PreconditionError("outside", "point outside the table");
    CausticSinusoid sn = caustic_sinusoid(e, p);
    // Boundary points touch the boundary caustic; keep the range open.
    M_ = std::min(sn.A + sn.R, 1.0 - 1e-13);
    m_ = M_ > 0 ? p.x * p.x * e.c2() / M_ : 0.0;
    S_ = sn.A;
    P_ = sn.R;
    const double c2 = e.c2();
    beta_M_ = M_ > c2 * (1 + 1e-15) ? beta2_of_offset(e, M_ / c2 - 1.0, true) : 0.5;
    beta_m_ = m_ < c2 * (1 - 1e-15) ? (m_ > 0 ? beta2_of_offset(e, 1.0 - m_ / c2, false)
                                                : std::atan(std::sqrt(1.0 / c2 - 1.0)) / kPi)
                                    : 0.5;
}

double PeriodicSearch::focal_offset(long long k, long long n, bool elliptic) {
    long long g = std::gcd(k, n);
    auto key = std::make_tuple(k / g, n / g, elliptic);
    if (auto it = roots_.find(key); it != roots_.end()) return it->second;
    const double target = static_cast<double>(k) / static_cast<double>(n);
    const double c2 = e_.c2();
    double hi_eps = elliptic ? M_ / c2 - 1.0 : 1.0 - std::max(m_ / c2, 1e-14);
    auto f = [&](double x) { return beta2_of_offset(e_, std::exp(x), elliptic) - target; };
    double x_lo = std::log(kOffsetFloor), x_hi = std::log(hi_eps);
    double f_lo = f(x_lo), f_hi = f(x_hi);
    double eps = std::numeric_limits<double>::quiet_NaN();
    if (f_lo > 0 && f_hi < 0) {
        boost::uintmax_t iters = 200;
        auto r = boost::math::tools::toms748_solve(f, x_lo, x_hi, f_lo, f_hi,
                                                   boost::math::tools::eps_tolerance<double>(52), iters);
        eps = std::exp(0.5 * (r.first + r.second));
    } else if (f_lo <= 0) {
        ++unresolved_;
    }
    roots_[key] = eps;
    return eps;
}

long long PeriodicSearch::betti_count(int n) const {
    auto roots_in = [&](double lo_beta) {
        // k with lo_beta < k/n < 1/2
        long long k0 = static_cast<long long>(std::floor(lo_beta * n)) + 1;
        long long k1 = (n % 2 == 0) ? n / 2 - 1 : (n - 1) / 2;
        return std::max(0LL, k1 - k0 + 1);
    };
    long long count = 4 * roots_in(beta_M_);
    if (n % 2 == 0) {
        count += 4 * roots_in(beta_m_);
        if (std::abs(p_.y) < 1e-15) count += 2;
        if (std::abs(p_.x) < 1e-15) count += 2;
    }
    return count;
}

std::vector<PeriodicDirection> PeriodicSearch::directions(int n, double certify_tol) {
    if (n < 2) throw PreconditionError("bad-count", "n must be at least 2");
    std::vector<PeriodicDirection> out;
    const bool on_boundary = e_.on_boundary(p_);
    auto collect = [&](bool elliptic, double lo_beta) {
        long long k1 = (n % 2 == 0) ? n / 2 - 1 : (n - 1) / 2;
        for (long long k = static_cast<long long>(std::floor(lo_beta * n)) + 1; k <= k1; ++k) {
            double eps = focal_offset(k, n, elliptic);
            if (!std::isfinite(eps)) continue;
            for (int r = 0; r < 2; ++r)
                for (int flip = 0; flip < 2; ++flip) {
                    auto d = certify(e_, p_, n, certify_tol, eps, elliptic, r, flip);
                    if (!d) continue;
                    // On the boundary only inward shots are meaningful.
                    if (on_boundary && d->direction.dot(e_.outward_normal(p_)) >= 0) continue;
                    out.push_back(*d);
                }
        }
    };
    if (M_ > e_.c2()) collect(true, beta_M_);
    if (n % 2 == 0) {
        if (m_ < e_.c2()) collect(false, beta_m_);
        // Axis orbits are focal (degenerate) and invisible to the Betti root search.
        if (std::abs(p_.y) < 1e-15)
            for (double sx : {1.0, -1.0}) {
                auto d = axis_direction(e_, p_, {sx, 0.0}, n);
                if (d.closure_error < certify_tol && !(on_boundary && sx * p_.x > 0)) out.push_back(d);
            }
        if (std::abs(p_.x) < 1e-15)
            for (double sy : {1.0, -1.0}) {
                auto d = axis_direction(e_, p_, {0.0, sy}, n);
                if (d.closure_error < certify_tol && !(on_boundary && sy * p_.y > 0)) out.push_back(d);
            }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.angle < b.angle; });
    return out;
}

std::vector<PeriodicDirection> find_periodic_directions(const Ellipse& e, const Vec2& p, int n, double certify_tol) {
    PeriodicSearch search(e, p);
    return search.directions(n, certify_tol);
}

// ---------------------------------------------------------------------------
// Connecting trajectories by length maximization over the boundary angles.

namespace {

struct Chain {
    const Ellipse& e;
    Vec2 p1, p2;
    int inner;  // number of boundary vertices

    Vec2 vertex(const std::vector<double>& phi, int i) const {
        if (i == 0) return p1;
        if (i == inner + 1) return p2;
        return e.point_at(phi[static_cast<size_t>(i - 1)]);
    }
    double length(const std::vector<double>& phi) const {
        double L = 0;
        for (int i = 0; i <= inner; ++i) L += (vertex(phi, i + 1) - vertex(phi, i)).norm();
        return L;
    }
    // Local objective for vertex i (1-based) with its neighbours fixed.
    double local(const std::vector<double>& phi, int i, double t) const {
        Vec2 x = e.point_at(t);
        return (x - vertex(phi, i - 1)).norm() + (vertex(phi, i + 1) - x).norm();
    }
    double local_slope(const std::vector<double>& phi, int i, double t) const {
        Vec2 x = e.point_at(t);
        Vec2 dx{-std::sin(t), e.b() * std::cos(t)};
        Vec2 a = x - vertex(phi, i - 1), b = vertex(phi, i + 1) - x;
        double na = a.norm(), nb = b.norm();
        double g = 0;
        if (na > 0) g += dx.dot(a) / na;
        if (nb > 0) g -= dx.dot(b) / nb;
        return g;
    }
    std::vector<double> gradient(const std::vector<double>& phi) const {
        std::vector<double> g(phi.size());
        for (int i = 1; i <= inner; ++i) g[static_cast<size_t>(i - 1)] = local_slope(phi, i, phi[static_cast<size_t>(i - 1)]);
        return g;
    }
};

// Best angle for one vertex: global scan on the first pass, local afterwards.
double best_angle(const Chain& ch, const std::vector<double>& phi, int i, bool global) {
    double cur = phi[static_cast<size_t>(i - 1)];
    double center = cur, half = 0.25;
    if (global) {
        double best = -1;
        for (int k = 0; k < 96; ++k) {
            double t = kTwoPi * k / 96;
            double v = ch.local(phi, i, t);
            if (v > best) {
                best = v;
                center = t;
            }
        }
        half = kTwoPi / 96;
    }
    auto neg = [&](double t) { return -ch.local(phi, i, t); };
    auto r = boost::math::tools::brent_find_minima(neg, center - half, center + half, 52);
    double t = r.first;
    // Polish on the slope, which has a simple root at the maximum.
    double d = 1e-6;
    double ga = ch.local_slope(phi, i, t - d), gb = ch.local_slope(phi, i, t + d);
    if (ga > 0 && gb < 0) {
        auto slope = [&](double s) { return ch.local_slope(phi, i, s); };
        boost::uintmax_t it = 60;
        auto rr = boost::math::tools::toms748_solve(slope, t - d, t + d, ga, gb,
                                                    boost::math::tools::eps_tolerance<double>(52), it);
        t = 0.5 * (rr.first + rr.second);
    }
    if (ch.local(phi, i, t) >= ch.local(phi, i, cur)) return t;
    return cur;
}

// Newton on the gradient with a tridiagonal finite-difference Hessian.
bool newton_polish(const Chain& ch, std::vector<double>& phi) {
    const size_t n = phi.size();
    auto gmax = [](const std::vector<double>& g) {
        double m = 0;
        for (double x : g) m = std::max(m, std::abs(x));
        return m;
    };
    std::vector<double> g = ch.gradient(phi);
    for (int it = 0; it < 40 && gmax(g) > 1e-14; ++it) {
        const double h = 1e-6;
        std::vector<double> lo(n), di(n), up(n);
        for (size_t j = 0; j < n; ++j) {
            auto ph = phi, pm = phi;
            ph[j] += h;
            pm[j] -= h;
            auto gp = ch.gradient(ph), gm = ch.gradient(pm);
            di[j] = (gp[j] - gm[j]) / (2 * h);
            if (j > 0) up[j - 1] = (gp[j - 1] - gm[j - 1]) / (2 * h);
            if (j + 1 < n) lo[j + 1] = (gp[j + 1] - gm[j + 1]) / (2 * h);
        }
        // Thomas algorithm for H dx = -g.
        std::vector<double> cp(n), dp(n), dx(n);
        for (size_t j = 0; j < n; ++j) {
            double den = di[j] - (j ? lo[j] * cp[j - 1] : 0.0);
            if (den == 0) return false;
            cp[j] = j + 1 < n ? up[j] / den : 0.0;
            dp[j] = (-g[j] - (j ? lo[j] * dp[j - 1] : 0.0)) / den;
        }
        for (size_t j = n; j-- > 0;) dx[j] = dp[j] - (j + 1 < n ? cp[j] * dx[j + 1] : 0.0);
        auto trial = phi;
        for (size_t j = 0; j < n; ++j) trial[j] += dx[j];
        auto gt = ch.gradient(trial);
        if (!(gmax(gt) < gmax(g))) break;
        phi = trial;
        g = gt;
    }
    return gmax(g) < 1e-10;
}

}  // namespace

double path_length(const std::vector<Vec2>& pts) {
    double L = 0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) L += (pts[i + 1] - pts[i]).norm();
    return L;
}

double reflection_residual(const Ellipse& e, const std::vector<Vec2>& pts) {
    double worst = 0;
    for (size_t i = 1; i + 1 < pts.size(); ++i) {
        Vec2 n = e.outward_normal(pts[i]);
        Vec2 t{-n.y, n.x};
        Vec2 din = (pts[i] - pts[i - 1]).unit(), dout = (pts[i + 1] - pts[i]).unit();
        double ain = std::atan2(std::abs(din.cross(t)), din.dot(t));
        double aout = std::atan2(std::abs(dout.cross(t)), dout.dot(t));
        worst = std::max(worst, std::abs(ain - aout));
    }
    return worst;
}

std::vector<Vec2> connecting_vertices(const Ellipse&, const Vec2& p1, const Vec2& p2, const Trajectory& t) {
    std::vector<Vec2> pts{p1};
    for (const auto& s : t.states) pts.push_back(s.p);
    pts.push_back(p2);
    return pts;
}

Trajectory connecting_trajectory(const Ellipse& e, const Vec2& p1, const Vec2& p2, int n, const ConnectOptions& opt) {
    if (n < 1) throw PreconditionError("bad-count", "n must be positive");
    if (!e.in_table(p1) || !e.in_table(p2)) throw PreconditionError("outside", "endpoints must lie in the table");
    if (is_focus(e, p1) && is_focus(e, p2) && std::abs(p1.x + p2.x) < 1e-12)
        throw PreconditionError("focal-pair", "endpoints are the two foci");
    if (opt.starts < 1) throw PreconditionError("bad-count", "starts must be positive");

    Chain ch{e, p1, p2, n - 1};
    auto make = [&](const std::vector<double>& phi) {
        Trajectory t;
        for (int i = 1; i <= ch.inner; ++i) {
            Vec2 x = ch.vertex(phi, i), nx = ch.vertex(phi, i + 1);
            t.states.push_back({x, (nx - x).unit()});
        }
        Vec2 first = ch.vertex(phi, 1) - p1;
        if (first.norm() > 0) t.caustic = caustic_of_direction(e, p1, first);
        return t;
    };
    if (ch.inner == 0) return make({});

    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> U(0.0, kTwoPi);
    std::vector<double> best;
    double best_len = -1;
    bool best_ok = false;
    for (int s = 0; s < opt.starts; ++s) {
        std::vector<double> phi(static_cast<size_t>(ch.inner));
        for (auto& x : phi) x = U(rng);
        double L = ch.length(phi);
        bool converged = false;
        for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
            for (int i = 1; i <= ch.inner; ++i)
                phi[static_cast<size_t>(i - 1)] = best_angle(ch, phi, i, sweep < 2);
            double L2 = ch.length(phi);
            double gain = L2 - L;
            L = L2;
            if (gain < opt.gain_tol) {
                converged = true;
                break;
            }
        }
        bool polished = newton_polish(ch, phi);
        L = ch.length(phi);
        bool ok = converged && polished;
        if ((ok && !best_ok) || (ok == best_ok && L > best_len)) {
            best = phi;
            best_len = L;
            best_ok = ok;
        }
    }
    for (auto& x : best) x = wrap_angle(x);
    Trajectory t = make(best);
    if (!best_ok) throw ConnectError("length maximization did not converge", t);
    return t;
}

}  // namespace caustica
