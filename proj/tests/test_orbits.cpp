#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "caustica/orbits.hpp"
#include "caustica/periods.hpp"

using namespace caustica;

namespace {

const double kPi = std::acos(-1.0);
const Ellipse E6(0.6);
const Vec2 P0{0.2, 0.3};

}  // namespace

TEST_CASE("confocal conics through a point") {
    auto c0 = caustic_extrema(E6, {0, 0});
    CHECK(c0.M == doctest::Approx(0.36));
    CHECK(c0.m == doctest::Approx(0.0));
    auto x = caustic_extrema(E6, P0);
    CHECK(x.M + x.m == doctest::Approx(0.04 + 0.09 + 0.36));
    CHECK(x.M * x.m == doctest::Approx(0.04 * 0.36));
    CHECK(x.M == doctest::Approx(0.45863).epsilon(1e-4));
    CHECK(x.m == doctest::Approx(0.03137).epsilon(1e-3));
    // Matches brute-force optimization of s over the direction circle.
    auto sn = caustic_sinusoid(E6, P0);
    double smax = -1, smin = 2;
    for (int i = 0; i < 200000; ++i) {
        double th = kPi * i / 200000;
        double s = caustic_of_direction(E6, P0, {std::cos(th), std::sin(th)}).s;
        smax = std::max(smax, s);
        smin = std::min(smin, s);
        if (i % 997 == 0) CHECK(std::abs(sn.at(th) - s) < 1e-14);
    }
    CHECK(std::abs(smax - x.M) < 1e-9);
    CHECK(std::abs(smin - x.m) < 1e-9);
    CHECK_THROWS_AS(caustic_extrema(E6, {1, 0}), PreconditionError);
}

TEST_CASE("counting constants: closed form against total variation") {
    auto k = counting_constants(E6, P0);
    CHECK(k.closed_form);
    auto x = caustic_extrema(E6, P0);
    CHECK(k.odd == doctest::Approx(2 - 4 * betti_billiard(E6, x.M / 0.36).beta2));
    CHECK(std::abs(total_variation_constant(E6, P0, true) - k.odd) < 1e-6);
    // Minor axis: the hyperbolic extremum degenerates, fallback applies.
    auto ax = counting_constants(E6, {0, 0.3});
    CHECK_FALSE(ax.closed_form);
    CHECK(ax.odd > 0);
    // Near the boundary the odd constant tends to 2.
    CHECK(counting_constants(E6, {0.2, 0.99 * std::sqrt(0.64 * (1 - 0.04))}).odd > 1.6);
    CHECK_THROWS_AS(counting_constants(E6, {0.6, 0}), PreconditionError);
}

TEST_CASE("periodic directions are certified by simulation") {
    for (int n : {3, 5, 6, 7}) {
        auto dirs = find_periodic_directions(E6, P0, n);
        CHECK_FALSE(dirs.empty());
        for (const auto& d : dirs) {
            CHECK(d.closure_error < 1e-8);
            CHECK(recertify(E6, P0, d) < 1e-6);
            if (n % 2 == 1) CHECK(d.caustic.kind == CausticKind::Elliptic);
        }
        for (size_t i = 1; i < dirs.size(); ++i) CHECK(dirs[i - 1].angle < dirs[i].angle);
    }
    auto d3 = find_periodic_directions(E6, P0, 3);
    CHECK(std::abs(double(d3.size()) - counting_constants(E6, P0).odd * 3) <= 4);

    auto axis = find_periodic_directions(E6, {1, 0}, 2);
    REQUIRE(axis.size() == 1);
    CHECK(axis[0].direction.x == doctest::Approx(-1.0));
}

TEST_CASE("direction count equals the Betti count and grows linearly") {
    PeriodicSearch search(E6, P0);
    auto k = counting_constants(E6, P0);
    for (int n : {2, 9, 10, 31, 60, 101}) {
        auto dirs = search.directions(n);
        CHECK(static_cast<long long>(dirs.size()) == search.betti_count(n));
        if (n % 2 == 1) CHECK(std::abs(double(dirs.size()) - k.odd * n) <= 4);
    }
}

TEST_CASE("Poncelet: closure on one start implies closure everywhere") {
    double lam = lambda_for_beta2(E6, 2.0 / 9, true);
    double s = lam * E6.c2();
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(0, 2 * kPi);
    for (int i = 0; i < 20; ++i) {
        Vec2 q = E6.point_at(U(rng));
        Vec2 v = circulating_direction(E6, s, q, true);
        CHECK(closure_error(E6, {q, v}, 9) < 1e-6);
    }
}

TEST_CASE("connecting trajectory satisfies the reflection law") {
    Vec2 p1{0.1, 0.2}, p2{-0.3, 0.1};
    Trajectory t = connecting_trajectory(E6, p1, p2, 12);
    REQUIRE(t.states.size() == 11);
    auto pts = connecting_vertices(E6, p1, p2, t);
    CHECK(pts.size() == 13);
    CHECK(reflection_residual(E6, pts) < 1e-8);
    double smin = 2, smax = -1;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        double s = caustic_of_direction(E6, pts[i], pts[i + 1] - pts[i]).s;
        smin = std::min(smin, s);
        smax = std::max(smax, s);
    }
    CHECK(smax - smin < 1e-8);

    // Local maximality: perturbing any bounce along the boundary shortens the path.
    double L = path_length(pts);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(-1e-4, 1e-4);
    for (int trial = 0; trial < 50; ++trial) {
        auto q = pts;
        for (size_t i = 1; i + 1 < q.size(); ++i) q[i] = E6.point_at(boundary_angle(E6, q[i]) + U(rng));
        CHECK(path_length(q) <= L + 1e-15);
    }

    Trajectory ax = connecting_trajectory(E6, {1, 0}, {1, 0}, 2);
    REQUIRE(ax.states.size() == 1);
    CHECK(ax.states[0].p.x == doctest::Approx(-1.0));
    CHECK_THROWS_AS(connecting_trajectory(E6, {0.6, 0}, {-0.6, 0}, 3), PreconditionError);
    CHECK_THROWS_AS(connecting_trajectory(E6, p1, p2, 0), PreconditionError);
}

TEST_CASE("connecting trajectory is reproducible for a fixed seed") {
    ConnectOptions opt;
    opt.seed = 42;
    auto a = connecting_trajectory(E6, {0.1, 0.2}, {-0.3, 0.1}, 6, opt);
    auto b = connecting_trajectory(E6, {0.1, 0.2}, {-0.3, 0.1}, 6, opt);
    for (size_t i = 0; i < a.states.size(); ++i) CHECK(a.states[i].p.x == b.states[i].p.x);
}
