#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "caustica/legendre.hpp"

using namespace caustica;

namespace {

const double kPi = std::acos(-1.0);

LegendrePoint random_point(const LegendreCurve& L, std::mt19937_64& rng) {
    // X > max(1, lambda) makes the right-hand side positive.
    std::uniform_real_distribution<double> U(0.1, 4.0);
    double x = std::max(1.0, L.lambda().real()) + U(rng);
    double y = std::sqrt(L.rhs(x).real());
    return LegendrePoint::affine(x, y);
}

}  // namespace

TEST_CASE("Legendre parameter of a caustic") {
    CHECK(lambda_of(Ellipse(0.6), classify_caustic(Ellipse(0.6), 0.18)).lambda().real() == doctest::Approx(0.5));
    Ellipse h(1 / std::sqrt(2.0));
    CHECK(lambda_of(h, classify_caustic(h, 0.25)).lambda().real() == doctest::Approx(0.5));
    CHECK_THROWS_AS(lambda_of(Ellipse(0.6), classify_caustic(Ellipse(0.6), 0.36)), PreconditionError);
    CHECK_THROWS_AS(LegendreCurve(1.0), PreconditionError);
    CHECK_THROWS_AS(LegendreCurve(0.0), PreconditionError);
}

TEST_CASE("group law: identity, two-torsion, inverses") {
    LegendreCurve L(0.5);
    auto P = LegendrePoint::affine(1.0 / 3, 1.0 / (3 * std::sqrt(3.0)));
    REQUIRE(L.contains(P));
    auto id = add(L, P, LegendrePoint::infinity());
    CHECK(point_distance(id, P) < 1e-15);
    auto t = add(L, LegendrePoint::affine(0.0, 0.0), LegendrePoint::affine(1.0, 0.0));
    CHECK_FALSE(t.inf);
    CHECK(std::abs(t.x - 0.5) < 1e-14);
    CHECK(std::abs(t.y) < 1e-14);
    CHECK(add(L, P, -P).inf);
    CHECK(mul(L, 2, LegendrePoint::affine(0.0, 0.0)).inf);
    CHECK(mul(L, 2, LegendrePoint::affine(1.0, 0.0)).inf);
    CHECK(mul(L, 2, LegendrePoint::affine(0.5, 0.0)).inf);
    CHECK(point_distance(mul(L, 1, P), P) < 1e-15);
    CHECK(mul(L, 0, P).inf);
    CHECK(point_distance(mul(L, -3, P), -mul(L, 3, P)) < 1e-12);
    CHECK_THROWS_AS(add(L, LegendrePoint::affine(2.0, 1.0), P), PreconditionError);
}

TEST_CASE("group law: associativity and multiplication consistency") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> Ul(0.05, 0.95);
    for (int i = 0; i < 100; ++i) {
        LegendreCurve L(Ul(rng));
        auto P = random_point(L, rng), Q = random_point(L, rng), R = random_point(L, rng);
        auto lhs = add(L, add(L, P, Q), R), rhs = add(L, P, add(L, Q, R));
        CHECK(point_distance(lhs, rhs) < 1e-9);
        CHECK(point_distance(add(L, P, Q), add(L, Q, P)) < 1e-12);
        CHECK(L.contains(lhs));
        CHECK(point_distance(mul(L, 6, P), mul(L, 2, mul(L, 3, P))) < 1e-9);
    }
}

TEST_CASE("billiard section and the constant-abscissa section") {
    Ellipse h(1 / std::sqrt(2.0));
    auto B = billiard_section(h, 0.5);
    CHECK(B.x.real() == doctest::Approx(1.0 / 3));
    CHECK(B.y.real() == doctest::Approx(1.0 / (3 * std::sqrt(3.0))));
    CHECK(LegendreCurve(0.5).contains(B, 1e-12));

    for (double lam : {0.3, 1.2, 1.8}) {
        auto M = masser_point(h, lam);
        CHECK(M.x.real() == doctest::Approx(2.0));
        CHECK(M.y.real() == doctest::Approx(std::sqrt(2 * (2 - lam))));
    }
    Ellipse e(0.6);
    CHECK(LegendreCurve(0.5).residual(masser_point(e, 0.5)) < 1e-12);

    // B approaches the two-torsion point (1,0) at the focal caustic.
    auto Bf = billiard_section(e, 1 - 1e-9);
    CHECK(std::abs(Bf.x - 1.0) < 1e-6);
    CHECK(std::abs(Bf.y) < 1e-6);
    CHECK_THROWS_AS(billiard_section(e, 1.0), PreconditionError);
    CHECK_THROWS_AS(billiard_section(e, 1 / 0.36), PreconditionError);
}

TEST_CASE("billiard section = Masser section + (lambda,0)") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> Uc(0.1, 0.9), Ut(0.02, 0.98);
    for (int i = 0; i < 50; ++i) {
        Ellipse e(Uc(rng));
        double lam = Ut(rng) / e.c2();
        if (std::abs(lam - 1) < 1e-3) continue;
        LegendreCurve L(lam);
        auto B = billiard_section(e, lam);
        auto M = masser_point(e, lam);
        auto sum = add(L, M, LegendrePoint::affine(lam, 0.0));
        CHECK(point_distance(sum, B) < 1e-10 * std::max(1.0, std::abs(B.x)));
    }
}

TEST_CASE("ramification points map to the two-torsion abscissae") {
    Ellipse e(0.6);
    auto s = classify_caustic(e, 0.18);
    auto pts = boundary_caustic_intersection(e, s).points();
    auto L = lambda_of(e, s);
    std::vector<std::complex<double>> want{L.lambda(), 0.0, 1.0};
    for (int i = 0; i < 3; ++i) {
        PhasePoint x{{pts[i][0].real(), pts[i][1].real()}, {0, 0}};
        auto tan = tangent_directions(e, s.s, x.p);
        REQUIRE_FALSE(tan.empty());
        x.v = tan[0];
        auto P = phase_to_legendre(e, s, x);
        REQUIRE_FALSE(P.inf);
        CHECK(std::abs(P.x - want[i]) < 1e-7);
    }
    PhasePoint p4{{pts[3][0].real(), pts[3][1].real()}, {0, 0}};
    p4.v = tangent_directions(e, s.s, p4.p)[0];
    CHECK(phase_to_legendre(e, s, p4).inf);
}

TEST_CASE("phase points land on the Legendre curve and the bounce is a translation") {
    Ellipse e(0.6);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(0, 2 * kPi);
    for (double sv : {0.5, 0.8, 0.18, 0.3}) {
        auto s = classify_caustic(e, sv);
        auto L = lambda_of(e, s);
        ConjugationChecker checker(e);
        int used = 0;
        for (int i = 0; i < 50; ++i) {
            Vec2 q = e.point_at(U(rng));
            auto dirs = tangent_directions(e, sv, q);
            if (dirs.empty()) continue;
            PhasePoint x{q, dirs[i % dirs.size()]};
            CHECK(L.contains(phase_to_legendre(e, s, x), 1e-10));
            CHECK(checker.defect(s, x) < 1e-9);
            ++used;
        }
        CHECK(used > 10);
        REQUIRE(checker.sign_for(sv).has_value());
        if (s.kind == CausticKind::Elliptic) CHECK(*checker.sign_for(sv) == 1);
    }
}

TEST_CASE("second involution images lie on the boundary") {
    Ellipse e(0.6);
    for (double sv : {0.05, 0.18, 0.3}) {
        auto img = iota_images(e, classify_caustic(e, sv));
        CHECK(std::abs(e.residual({img[0].real(), img[1].real()})) < 1e-12);
    }
}

TEST_CASE("j-invariant normalization") {
    CHECK(j_invariant(LegendreCurve(-1.0)).real() == doctest::Approx(1728));
    CHECK(j_invariant(LegendreCurve(0.5)).real() == doctest::Approx(1728));
    CHECK(j_invariant(LegendreCurve(2.0)).real() == doctest::Approx(1728));
    CHECK(j_invariant(LegendreCurve(3.0)).real() == doctest::Approx(256.0 * 343 / 36));
    CHECK(j_invariant(LegendreCurve(0.3)).real() != doctest::Approx(j_invariant(LegendreCurve(0.4)).real()));
}

TEST_CASE("billiard section is not torsion of small order") {
    Ellipse e(0.6);
    LegendreCurve L(0.51);
    auto B = billiard_section(e, 0.51);
    for (int n = 1; n <= 24; ++n) CHECK_FALSE(mul(L, n, B).inf);
}

TEST_CASE("JSON form of points") {
    CHECK(to_json(LegendrePoint::infinity()) == "{\"inf\":true}");
    CHECK(to_json(LegendrePoint::affine(1.0, 0.0)).find("\"x\"") != std::string::npos);
}
