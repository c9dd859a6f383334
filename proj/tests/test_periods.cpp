#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "caustica/periods.hpp"

using namespace caustica;

namespace {
const double kPi = std::acos(-1.0);
}

TEST_CASE("real period: AGM against quadrature") {
    CHECK(std::abs(omega2(0.5) - kPi / agm(1.0, 1.0 / std::sqrt(2.0))) < 1e-12);
    CHECK(omega2(0.5) == doctest::Approx(3.708149354).epsilon(1e-9));
    CHECK(std::abs(omega2(1e-12) - kPi) < 1e-9);
    for (int i = 1; i <= 50; ++i) {
        double lam = i / 51.0;
        CHECK(std::abs(omega2(lam) - omega2_quadrature(lam)) < 1e-10);
    }
    // Logarithmic growth at the focal end.
    double gap = omega2(1 - 1e-4) + std::log(1e-4);
    CHECK(std::abs(gap - std::log(16.0)) < 1e-3);
    for (double lam : {1.3, 1.7, 2.5}) {
        CHECK(std::abs(omega2(lam) - omega2_quadrature(lam)) < 1e-10);
        CHECK(std::abs(omega2(lam) - omega2_inverted(lam)) < 1e-10);
    }
    CHECK_THROWS_AS(omega2(1.0), PreconditionError);
    CHECK_THROWS_AS(omega2(0.0), PreconditionError);
}

TEST_CASE("imaginary period") {
    CHECK(std::abs(omega1(0.5) - std::complex<double>(0, omega2(0.5))) < 1e-12);
    CHECK(std::abs(omega1(1 - 1e-12).imag() - kPi) < 1e-9);
    CHECK(std::abs(omega1(0.3) - omega1_quadrature(0.3)) < 1e-10);
    auto pp = periods(0.3);
    CHECK(pp.omega2 > 0);
    CHECK(pp.omega1.real() == 0.0);
    CHECK((pp.omega1 / pp.omega2).imag() > 0);
}

TEST_CASE("incomplete integral I_u") {
    CHECK(integral_I(1.0, 0.0) == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(integral_I(2.0, 0.0) == doctest::Approx(kPi / 2).epsilon(1e-12));
    for (double lam : {0.2, 0.5, 0.9}) CHECK(std::abs(integral_I(1.0, lam) - omega2(lam)) < 1e-10);
    CHECK_THROWS_AS(integral_I(0.5, 0.2), PreconditionError);
}

TEST_CASE("Betti coordinates: limits and side constants") {
    Ellipse h(1 / std::sqrt(2.0));
    auto b0 = betti_billiard(h, 1e-9);
    CHECK(b0.beta1 == 0.5);
    CHECK(std::abs(b0.beta2 - 0.25) < 1e-6);
    auto below = betti_billiard(h, 1 - 1e-9), above = betti_billiard(h, 1 + 1e-9);
    CHECK(below.beta1 == 0.5);
    CHECK(above.beta1 == 0.0);
    CHECK(std::abs(below.beta2 - 0.5) < 0.1);
    CHECK(std::abs(above.beta2 - 0.5) < 0.1);
    CHECK(betti_billiard(h, 2 - 1e-9).beta2 < 1e-3);
    CHECK_THROWS_AS(betti_billiard(h, 2.5), PreconditionError);
    CHECK_THROWS_AS(betti_billiard(h, -0.1), PreconditionError);

    Ellipse e(0.6);
    // The generic limit at lambda -> 0+: atan(sqrt(1/c^2 - 1))/pi.
    CHECK(std::abs(betti_billiard(e, 1e-10).beta2 - std::atan(std::sqrt(1 / 0.36 - 1)) / kPi) < 1e-6);
}

TEST_CASE("Betti coordinate is monotone on each side") {
    Ellipse e(0.6);
    double prev = -1;
    for (int i = 1; i <= 200; ++i) {
        double b = betti_billiard(e, i / 201.0).beta2;
        CHECK(b > prev);
        prev = b;
    }
    prev = 2;
    double lo = 1, hi = 1 / 0.36;
    for (int i = 1; i <= 200; ++i) {
        double b = betti_billiard(e, lo + (hi - lo) * i / 201.0).beta2;
        CHECK(b < prev);
        prev = b;
    }
}

TEST_CASE("near-focal evaluation approaches 1/2 monotonically") {
    Ellipse e(0.6);
    for (bool elliptic : {false, true}) {
        double prev = elliptic ? betti_billiard(e, 1 + 1e-2).beta2 : betti_billiard(e, 1 - 1e-2).beta2;
        for (int k = 3; k <= 300; k += 3) {
            double b = beta2_near_focal(e, std::pow(10.0, -k), elliptic);
            CHECK(b > prev);
            CHECK(b < 0.5);
            prev = b;
        }
    }
    // Agrees with the direct evaluation where both are valid.
    CHECK(std::abs(beta2_near_focal(e, 1e-3, true) - betti_billiard(e, 1 + 1e-3).beta2) < 1e-10);
    CHECK(std::abs(beta2_near_focal(e, 1e-3, false) - betti_billiard(e, 1 - 1e-3).beta2) < 1e-10);
}

TEST_CASE("inverse Betti map") {
    Ellipse e(0.6);
    double lam = lambda_for_beta2(e, 1.0 / 7, true);
    CHECK(lam > 1);
    CHECK(std::abs(betti_billiard(e, lam).beta2 - 1.0 / 7) < 1e-13);
    double lh = lambda_for_beta2(e, 0.4, false);
    CHECK(lh < 1);
    CHECK(std::abs(betti_billiard(e, lh).beta2 - 0.4) < 1e-13);
    CHECK_THROWS_AS(lambda_for_beta2(e, 0.7, true), PreconditionError);
}

TEST_CASE("rotation number equals the Betti coordinate") {
    Ellipse e(0.6);
    auto s = classify_caustic(e, 0.8);
    double beta = betti_billiard(e, 0.8 / 0.36).beta2;
    CHECK(std::abs(rotation_number(e, s, 100000) - beta) < 10.0 / 100000);
    Ellipse round(0.01);
    CHECK(std::abs(rotation_number(round, classify_caustic(round, 0.5), 20000) - std::acos(std::sqrt(0.5)) / kPi) < 1e-3);
    CHECK_THROWS_AS(rotation_number(e, classify_caustic(e, 0.18), 1000), PreconditionError);
}

TEST_CASE("Picard-Fuchs operator annihilates the real period") {
    CHECK(picard_fuchs_residual(0.3) < 1e-5);
    CHECK(picard_fuchs_residual(0.7) < 1e-5);
    // Without extrapolation the error is O(h^2): halving h divides it by about 4.
    double r1 = picard_fuchs_residual_plain(0.4, 4e-3), r2 = picard_fuchs_residual_plain(0.4, 2e-3);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("Gauss-Legendre operator on the elliptic logarithm is nonzero") {
    Ellipse e(0.6);
    for (double lam : {1.2, 1.5, 2.0}) CHECK(std::abs(gauss_legendre_on_logarithm(e, lam)) > 1e-2);
    CHECK(manin_closed_form(e, 1.5) == doctest::Approx(2 * 0.6 * 0.8 * std::pow(1 - 0.54, -1.5)));
}
