#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "caustica/orbits.hpp"

using namespace caustica;

namespace {

const double kPi = std::acos(-1.0);
const Ellipse E6(0.6);
const Vec2 P0{0.2, 0.3};

// Position of p along the k-th chord, for the reversed/other-tangent test.
Vec2 chord_direction(const Ellipse& e, const Vec2& p, double angle, int k) {
    PhasePoint x = first_bounce(e, {p, {std::cos(angle), std::sin(angle)}});
    if (k == 0) return {std::cos(angle), std::sin(angle)};
    for (int i = 1; i < k; ++i) x = advance(e, x);
    return x.v;
}

}  // namespace

TEST_CASE("boomerang shots re-simulate within tolerance") {
    for (int n_max : {10, 20}) {
        auto shots = boomerang_scan(E6, P0, n_max, 1e-9);
        int rev = 0, other = 0;
        for (const auto& s : shots) {
            CHECK(std::abs(segment_offset(E6, P0, s.angle, s.bounce, P0)) < 1e-9);
            CHECK(s.bounce >= 1);
            CHECK(s.bounce <= n_max);
            Vec2 v0{std::cos(s.angle), std::sin(s.angle)};
            Vec2 vk = chord_direction(E6, P0, s.angle, s.bounce);
            if (s.type == BoomerangType::Reversed) {
                ++rev;
                CHECK((vk + v0).norm() < 1e-6);
            } else {
                ++other;
                CHECK((vk + v0).norm() > 1e-6);
            }
        }
        CHECK(rev > 0);
        CHECK(other > 0);
    }
}

TEST_CASE("boomerang counts per bounce index grow linearly") {
    auto shots = boomerang_scan(E6, P0, 30, 1e-9);
    std::vector<int> per_k(31, 0);
    for (const auto& s : shots) per_k[s.bounce]++;
    // Compare the totals over the first and last ten indices: linear growth
    // puts the ratio near (sum 21..30)/(sum 1..10) = 255/55.
    double lo = 0, hi = 0;
    for (int k = 1; k <= 10; ++k) lo += per_k[k];
    for (int k = 21; k <= 30; ++k) hi += per_k[k];
    CHECK(hi / lo > 2.5);
    CHECK(hi / lo < 8.0);
}

TEST_CASE("boomerang: axis shot retraces itself") {
    auto shots = boomerang_scan(E6, {0.3, 0}, 3, 1e-9);
    bool found = false;
    for (const auto& s : shots)
        if ((s.angle < 1e-9 || std::abs(s.angle - kPi) < 1e-9) && s.type == BoomerangType::Reversed) found = true;
    CHECK(found);
    CHECK_THROWS_AS(boomerang_scan(E6, {0.6, 0}, 3, 1e-9), PreconditionError);
    CHECK_THROWS_AS(boomerang_scan(E6, {1, 0}, 3, 1e-9), PreconditionError);
}

TEST_CASE("shrinking the tolerance never adds boomerang shots") {
    auto a = boomerang_scan(E6, P0, 12, 1e-9);
    auto b = boomerang_scan(E6, P0, 12, 1e-10);
    CHECK(b.size() <= a.size());
}

TEST_CASE("boomerang output is independent of the thread count") {
    ScanOptions one, four;
    four.threads = 4;
    auto a = boomerang_scan(E6, P0, 8, 1e-9, one);
    auto b = boomerang_scan(E6, P0, 8, 1e-9, four);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].angle == b[i].angle);
        CHECK(a[i].bounce == b[i].bounce);
    }
}

TEST_CASE("hole shots: generic case certifies, focal case is flagged") {
    Vec2 p1{0.1, 0.2}, p2{-0.3, 0.1}, h{1, 0};
    auto r = hole_scan(E6, p1, p2, h, 20, 1e-9);
    CHECK_FALSE(r.focal_exception);
    for (const auto& s : r.shots) {
        CHECK(std::abs(segment_offset(E6, p1, s.angle, s.ball_segment, p2)) < 1e-9);
        CHECK(s.hole_distance < 1e-9);
        CHECK(s.hole_bounce > s.ball_segment);
    }
    auto f = hole_scan(E6, {0.6, 0}, {-0.6, 0}, {0, 0.8}, 6, 1e-9);
    CHECK(f.focal_exception);
    CHECK_FALSE(f.shots.empty());
    auto tight = hole_scan(E6, {0.6, 0}, {-0.6, 0}, {0, 0.8}, 6, 1e-10);
    CHECK(tight.shots.size() <= f.shots.size());
    CHECK_THROWS_AS(hole_scan(E6, p1, p1, h, 5, 1e-9), PreconditionError);
    CHECK_THROWS_AS(hole_scan(E6, p1, p2, {0.5, 0}, 5, 1e-9), PreconditionError);
}

TEST_CASE("angle pairs come from certified periodic directions") {
    // From the center the two axis directions are periodic and orthogonal.
    auto pairs = angle_pair_scan(E6, {0, 0}, kPi / 2, 6, 1e-9);
    CHECK_FALSE(pairs.empty());
    PeriodicSearch search(E6, {0, 0});
    for (const auto& pr : pairs) {
        CHECK(pr.angle_mismatch <= 1e-9);
        for (const auto* d : {&pr.first, &pr.second}) {
            CHECK(d->closure_error <= 1e-9);
            bool listed = false;
            for (const auto& q : search.directions(d->period))
                if (std::abs(q.angle - d->angle) < 1e-12) listed = true;
            CHECK(listed);
        }
    }
    auto generic = angle_pair_scan(E6, P0, kPi / 3, 20, 1e-9);
    CHECK(generic.size() <= 4);
    CHECK_THROWS_AS(angle_pair_scan(E6, P0, 0.0, 5, 1e-9), PreconditionError);
}

TEST_CASE("lattice angle pairs: CM lattices have many, generic ones few") {
    auto sq = parallelogram_angle_pairs({0, 1}, kPi / 2, 10);
    CHECK(sq.pairs.size() > 3);
    CHECK(sq.quadratic_tau);
    bool family = false;  // (1, i k): lambda = 1, delta = k tau up to scale
    for (const auto& p : sq.pairs)
        if ((p.a1 == 0 && p.b1 == 1 && p.a2 == 1 && p.b2 == 0) || (p.a1 == 1 && p.b1 == 0 && p.a2 == 0 && p.b2 == 1))
            family = true;
    CHECK(family);
    auto cm = parallelogram_angle_pairs({0, std::sqrt(2.0)}, kPi / 2, 10);
    CHECK(cm.pairs.size() >= 4);
    CHECK(cm.quadratic_tau);
    std::complex<double> tau{1 / kPi, 1};
    for (double alpha : {0.7, std::arg(tau), 1.3})
        for (int H : {10, 30}) {
            auto g = parallelogram_angle_pairs(tau, alpha, H);
            CHECK(g.pairs.size() <= 3);
            CHECK_FALSE(g.quadratic_tau);
        }
    for (const auto& p : sq.pairs) CHECK(p.mismatch <= 1e-10);
}

TEST_CASE("slope-parametrized Betti coordinate turns on every elliptic arc") {
    auto turns = elliptic_interval_turns(E6, P0);
    REQUIRE_FALSE(turns.empty());
    for (int t : turns) CHECK(t >= 1);
    auto samples = betti_along_directions(E6, P0, 400);
    CHECK(samples.size() == 400);
    for (const auto& s : samples)
        if (s.elliptic) CHECK(s.beta2 > 0);
}
