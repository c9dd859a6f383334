// Grid-and-bisect scans over shot directions, angle pairs of periodic
// directions, lattice angle pairs, and the slope non-monotonicity probe.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <boost/math/constants/constants.hpp>

#include "caustica/orbits.hpp"
#include "caustica/periods.hpp"
#include "parallel.hpp"

namespace caustica {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();
constexpr double kTwoPi = 2.0 * kPi;

Vec2 unit_at(double t) { return {std::cos(t), std::sin(t)}; }

bool is_focus(const Ellipse& e, const Vec2& p) {
    return std::abs(p.y) < 1e-12 && std::abs(std::abs(p.x) - e.c()) < 1e-12;
}

// Phase points leaving bounces 1..n of the shot; index 0 holds the shot.
std::vector<PhasePoint> chain_of(const Ellipse& e, const Vec2& from, double angle, int n) {
    std::vector<PhasePoint> out;
    out.reserve(static_cast<size_t>(n) + 1);
    Vec2 v = unit_at(angle);
    out.push_back({from, v});
    PhasePoint x = first_bounce(e, {from, v});
    for (int k = 1; k <= n; ++k) {
        out.push_back(x);
        if (k < n) x = advance(e, x);
    }
    return out;
}

double offset_of(const PhasePoint& x, const Vec2& target) { return (target - x.p).cross(x.v); }

double wrap_pi(double t) {
    t = std::remainder(t, kTwoPi);
    return t;
}

// Bisection of f on [a, b] (sign change assumed) down to adjacent doubles.
template <class F>
double bisect(F f, double a, double b) {
    double fa = f(a);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0) == (fa < 0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

// A zero on the right end belongs to the next cell.
bool brackets(double fa, double fb) { return fa == 0.0 || (fb != 0.0 && (fa < 0) != (fb < 0)); }

}  // namespace

double segment_offset(const Ellipse& e, const Vec2& from, double angle, int k, const Vec2& target) {
    if (k < 0) throw PreconditionError("bad-count", "segment index must be non-negative");
    auto ch = chain_of(e, from, angle, std::max(k, 1));
    return offset_of(ch[static_cast<size_t>(k)], target);
}

std::vector<BoomerangShot> boomerang_scan(const Ellipse& e, const Vec2& p, int n_max, double tol,
                                          const ScanOptions& opt) {
    if (!(e.residual(p) < -kBoundaryTol)) throw PreconditionError("not-interior", "p must be interior");
    if (is_focus(e, p)) throw PreconditionError("focal-point", "boomerang scan excludes the foci");
    if (n_max < 1 || opt.cells < 8) throw PreconditionError("bad-count", "n_max >= 1 and cells >= 8 required");
    const int N = opt.cells;
    const auto K = static_cast<size_t>(n_max);
    // offsets[i][k-1]: signed distance of p from segment k at grid angle i.
    std::vector<std::vector<double>> offsets(static_cast<size_t>(N));
    detail::parallel_for(N, opt.threads, [&](int i) {
        auto ch = chain_of(e, p, kTwoPi * i / N, n_max);
        auto& row = offsets[static_cast<size_t>(i)];
        row.resize(K);
        for (size_t k = 1; k <= K; ++k) row[k - 1] = offset_of(ch[k], p);
    });
    std::vector<std::vector<BoomerangShot>> found(static_cast<size_t>(N));
    detail::parallel_for(N, opt.threads, [&](int i) {
        const auto& lo = offsets[static_cast<size_t>(i)];
        const auto& hi = offsets[static_cast<size_t>((i + 1) % N)];
        double a = kTwoPi * i / N, b = kTwoPi * (i + 1) / N;
        for (size_t k = 1; k <= K; ++k) {
            if (!brackets(lo[k - 1], hi[k - 1])) continue;
            int kk = static_cast<int>(k);
            auto f = [&](double t) { return segment_offset(e, p, t, kk, p); };
            double t = lo[k - 1] == 0.0 ? a : bisect(f, a, b);
            auto ch = chain_of(e, p, t, kk);
            const PhasePoint& x = ch[k];
            double dist = std::abs(offset_of(x, p));
            if (dist > tol) continue;
            Vec2 v = ch[0].v;
            BoomerangShot s;
            s.direction = v;
            s.angle = t >= kTwoPi ? t - kTwoPi : t;
            s.bounce = kk;
            s.distance = dist;
            if ((x.v - v).norm() < 1e-6) continue;  // periodic return, not a boomerang
            s.type = (x.v + v).norm() < 1e-6 ? BoomerangType::Reversed : BoomerangType::OtherTangent;
            found[static_cast<size_t>(i)].push_back(s);
        }
    });
    std::vector<BoomerangShot> out;
    for (auto& f : found) out.insert(out.end(), f.begin(), f.end());
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        return x.angle != y.angle ? x.angle < y.angle : x.bounce < y.bounce;
    });
    return out;
}

HoleScanResult hole_scan(const Ellipse& e, const Vec2& p1, const Vec2& p2, const Vec2& h, int n_max, double tol,
                         const ScanOptions& opt) {
    if (!(e.residual(p1) < -kBoundaryTol) || !(e.residual(p2) < -kBoundaryTol))
        throw PreconditionError("not-interior", "p1 and p2 must be interior");
    if ((p1 - p2).norm() < 1e-12) throw PreconditionError("same-point", "p1 and p2 must differ");
    if (!e.on_boundary(h)) throw PreconditionError("not-boundary", "h must lie on the boundary");
    if (n_max < 1 || opt.cells < 8) throw PreconditionError("bad-count", "n_max >= 1 and cells >= 8 required");

    HoleScanResult res;
    res.focal_exception = is_focus(e, p1) && is_focus(e, p2);
    const int N = opt.cells;
    const auto K = static_cast<size_t>(n_max);
    const double h_angle = boundary_angle(e, h);

    // Per grid angle: hole misfit of bounce n (angle along the boundary) and
    // ball offset of segment m.
    struct Row {
        std::vector<double> hole, ball;
    };
    std::vector<Row> rows(static_cast<size_t>(N));
    auto row_of = [&](double t) {
        Row r;
        auto ch = chain_of(e, p1, t, n_max);
        r.hole.resize(K + 1);
        r.ball.resize(K);
        for (size_t n = 1; n <= K; ++n) r.hole[n] = wrap_pi(boundary_angle(e, ch[n].p) - h_angle);
        for (size_t m = 0; m < K; ++m) r.ball[m] = offset_of(ch[m], p2);
        return r;
    };
    detail::parallel_for(N, opt.threads, [&](int i) { rows[static_cast<size_t>(i)] = row_of(kTwoPi * i / N); });

    // Exact misfits at angle t for the pair (m, n).
    auto certify = [&](double t, int m, int n, HoleShot& s) {
        auto ch = chain_of(e, p1, t, n_max);
        const PhasePoint& seg = ch[static_cast<size_t>(m)];
        s.ball_distance = std::abs(offset_of(seg, p2));
        // The shot itself only reaches points ahead of p1.
        if (m == 0 && (p2 - p1).dot(seg.v) <= 0) return false;
        s.hole_distance = (ch[static_cast<size_t>(n)].p - h).norm();
        s.direction = ch[0].v;
        s.angle = t >= kTwoPi ? t - kTwoPi : t;
        s.ball_segment = m;
        s.hole_bounce = n;
        return s.ball_distance <= tol && s.hole_distance <= tol;
    };

    std::vector<std::vector<HoleShot>> found(static_cast<size_t>(N));
    detail::parallel_for(N, opt.threads, [&](int i) {
        const Row& lo = rows[static_cast<size_t>(i)];
        const Row& hi = rows[static_cast<size_t>((i + 1) % N)];
        double a = kTwoPi * i / N, b = kTwoPi * (i + 1) / N;
        auto& out = found[static_cast<size_t>(i)];
        // Roots of "bounce n lands on h", then any earlier segment through p2.
        for (size_t n = 1; n <= K; ++n) {
            double fa = lo.hole[n], fb = hi.hole[n];
            if (std::abs(fa) > kPi / 2 || std::abs(fb) > kPi / 2 || !brackets(fa, fb)) continue;
            int nn = static_cast<int>(n);
            auto f = [&](double t) {
                auto ch = chain_of(e, p1, t, nn);
                return wrap_pi(boundary_angle(e, ch[n].p) - h_angle);
            };
            double t = fa == 0.0 ? a : bisect(f, a, b);
            for (int m = 0; m < nn; ++m) {
                HoleShot s;
                if (certify(t, m, nn, s)) out.push_back(s);
            }
        }
        // Focal start: every segment of odd index runs through the other
        // focus, so the ball offsets vanish identically and carry no roots.
        if (res.focal_exception) return;
        for (size_t m = 0; m < K; ++m) {
            if (!brackets(lo.ball[m], hi.ball[m])) continue;
            int mm = static_cast<int>(m);
            auto f = [&](double t) { return segment_offset(e, p1, t, mm, p2); };
            double t = lo.ball[m] == 0.0 ? a : bisect(f, a, b);
            for (int n = mm + 1; n <= n_max; ++n) {
                HoleShot s;
                if (certify(t, mm, n, s)) out.push_back(s);
            }
        }
    });
    for (auto& f : found) res.shots.insert(res.shots.end(), f.begin(), f.end());
    std::sort(res.shots.begin(), res.shots.end(), [](const auto& x, const auto& y) {
        if (x.angle != y.angle) return x.angle < y.angle;
        if (x.ball_segment != y.ball_segment) return x.ball_segment < y.ball_segment;
        return x.hole_bounce < y.hole_bounce;
    });
    // The two root families can report the same shot.
    auto same = [](const HoleShot& x, const HoleShot& y) {
        return x.ball_segment == y.ball_segment && x.hole_bounce == y.hole_bounce && std::abs(x.angle - y.angle) < 1e-9;
    };
    std::vector<HoleShot> uniq;
    for (const auto& s : res.shots) {
        bool dup = false;
        for (auto it = uniq.rbegin(); it != uniq.rend() && s.angle - it->angle < 1e-9; ++it)
            if (same(s, *it)) dup = true;
        if (!dup) uniq.push_back(s);
    }
    res.shots = std::move(uniq);
    return res;
}

std::vector<AnglePair> angle_pair_scan(const Ellipse& e, const Vec2& p, double alpha, int n_max, double tol) {
    if (!(alpha > 0.0 && alpha < kPi)) throw PreconditionError("bad-angle", "alpha must lie in (0, pi)");
    if (n_max < 2) throw PreconditionError("bad-count", "n_max must be at least 2");
    PeriodicSearch search(e, p);
    std::vector<PeriodicDirection> all;
    for (int n = 2; n <= n_max; ++n)
        for (auto& d : search.directions(n))
            if (d.closure_error <= tol) all.push_back(d);
    // Keep the smallest period for directions found again at its multiples.
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.angle != b.angle ? a.angle < b.angle : a.period < b.period;
    });
    std::vector<PeriodicDirection> dirs;
    for (const auto& d : all)
        if (dirs.empty() || std::abs(d.angle - dirs.back().angle) > 1e-10) dirs.push_back(d);

    std::vector<AnglePair> out;
    for (const auto& v : dirs)
        for (const auto& w : dirs) {
            double mismatch = std::abs(std::remainder(w.angle - v.angle - alpha, kTwoPi));
            if (mismatch <= tol) out.push_back({v, w, mismatch});
        }
    return out;
}

LatticePairResult parallelogram_angle_pairs(std::complex<double> tau, double alpha, int H) {
    if (!(tau.imag() > 0)) throw PreconditionError("bad-tau", "tau must lie in the upper half plane");
    if (H < 1) throw PreconditionError("bad-height", "H must be at least 1");
    constexpr double kMatch = 1e-10;
    struct Node {
        long long a, b;
        double arg;  // argument mod pi
    };
    std::vector<Node> nodes;
    for (long long a = 0; a <= H; ++a)
        for (long long b = -H; b <= H; ++b) {
            if (a == 0 && b <= 0) continue;  // one representative per real line
            if (std::gcd(a, std::llabs(b)) != 1) continue;
            std::complex<double> z = static_cast<double>(a) * tau + static_cast<double>(b);
            double arg = std::fmod(std::arg(z) + kPi, kPi);
            nodes.push_back({a, b, arg});
        }
    std::sort(nodes.begin(), nodes.end(), [](const Node& x, const Node& y) { return x.arg < y.arg; });
    std::vector<double> args;
    for (const auto& n : nodes) args.push_back(n.arg);

    LatticePairResult res;
    std::set<std::pair<size_t, size_t>> seen;
    for (size_t i = 0; i < nodes.size(); ++i)
        for (double sgn : {1.0, -1.0}) {
            double target = std::fmod(nodes[i].arg + sgn * alpha + 4 * kPi, kPi);
            // Candidates near target, including across the wrap at pi.
            for (double t : {target, target - kPi, target + kPi}) {
                auto it = std::lower_bound(args.begin(), args.end(), t - kMatch);
                for (; it != args.end() && *it <= t + kMatch; ++it) {
                    auto j = static_cast<size_t>(it - args.begin());
                    if (j == i) continue;
                    auto key = std::minmax(i, j);
                    if (!seen.insert(key).second) continue;
                    double mis = std::abs(*it - t);
                    const Node& x = nodes[key.first];
                    const Node& y = nodes[key.second];
                    res.pairs.push_back({x.a, x.b, y.a, y.b, mis});
                }
            }
        }
    std::sort(res.pairs.begin(), res.pairs.end(), [](const LatticePair& x, const LatticePair& y) {
        return std::tie(x.a1, x.b1, x.a2, x.b2) < std::tie(y.a1, y.b1, y.a2, y.b2);
    });

    // Heuristic CM probe: A tau^2 + B tau + C = 0 with small integers.
    constexpr long long Q = 100;
    std::complex<double> t2 = tau * tau;
    for (long long A = 1; A <= Q && !res.quadratic_tau; ++A) {
        double Bf = -static_cast<double>(A) * t2.imag() / tau.imag();
        long long B = std::llround(Bf);
        if (std::abs(Bf - static_cast<double>(B)) > 1e-9 || std::llabs(B) > Q) continue;
        double Cf = -(static_cast<double>(A) * t2.real() + static_cast<double>(B) * tau.real());
        long long C = std::llround(Cf);
        if (std::abs(Cf - static_cast<double>(C)) > 1e-9 || std::llabs(C) > Q * Q) continue;
        long long g = std::gcd(std::gcd(A, std::llabs(B)), std::llabs(C));
        res.quadratic_tau = true;
        res.quadratic = {A / g, B / g, C / g};
    }
    return res;
}

std::vector<SlopeSample> betti_along_directions(const Ellipse& e, const Vec2& p, int samples) {
    if (samples < 16) throw PreconditionError("bad-count", "samples must be at least 16");
    if (!(e.residual(p) < -kBoundaryTol)) throw PreconditionError("not-interior", "p must be interior");
    CausticSinusoid sn = caustic_sinusoid(e, p);
    const double c2 = e.c2(), u = 1.0 / c2;
    std::vector<SlopeSample> out(static_cast<size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        double th = kTwoPi * i / samples;
        double s = sn.at(th), lam = s / c2;
        SlopeSample x{th, s, 0.0, false};
        if (lam > 1.0 + kFocalGuard && lam < u) {
            x.elliptic = true;
            x.beta2 = betti_billiard(e, lam).beta2;
        }
        out[static_cast<size_t>(i)] = x;
    }
    return out;
}

std::vector<int> elliptic_interval_turns(const Ellipse& e, const Vec2& p, int samples) {
    auto xs = betti_along_directions(e, p, samples);
    const size_t N = xs.size();
    // Start the cyclic walk at a non-elliptic sample so arcs are not split.
    size_t start = N;
    for (size_t i = 0; i < N; ++i)
        if (!xs[i].elliptic) {
            start = i;
            break;
        }
    std::vector<int> turns;
    if (start == N) return turns;
    int count = 0, last_sign = 0;
    bool inside = false;
    for (size_t j = 1; j <= N; ++j) {
        const auto& prev = xs[(start + j - 1) % N];
        const auto& cur = xs[(start + j) % N];
        if (!cur.elliptic) {
            if (inside) turns.push_back(count);
            inside = false;
            continue;
        }
        if (!inside) {
            inside = true;
            count = 0;
            last_sign = 0;
            continue;
        }
        double d = cur.beta2 - prev.beta2;
        if (std::abs(d) < 1e-15) continue;
        int sg = d > 0 ? 1 : -1;
        if (last_sign != 0 && sg != last_sign) ++count;
        last_sign = sg;
    }
    return turns;
}

}  // namespace caustica
