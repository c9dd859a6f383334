#pragma once

#include <complex>

#include "caustica/conics.hpp"

namespace caustica {

struct BettiCoords {
    double beta1 = 0, beta2 = 0;
    bool near_focal = false;  // |lambda - 1| inside the logarithmic guard band
};

struct PeriodPair {
    std::complex<double> omega1;
    double omega2 = 0;
};

inline constexpr double kFocalGuard = 1e-6;

double agm(double a, double b);

// Real period.  On (0,1): pi F(1/2,1/2;1;lambda) = int_1^inf dx/y.  On
// (1,inf): int_0^1 dx/y = int_lambda^inf dx/y.
double omega2(double lambda);
// Quadrature counterpart of omega2, for cross-checks.
double omega2_quadrature(double lambda);
// Value on (1,inf) through the curve with parameter 1/lambda.
double omega2_inverted(double lambda);

std::complex<double> omega1(double lambda);
std::complex<double> omega1_quadrature(double lambda);
PeriodPair periods(double lambda);

// int_u^inf dx / sqrt(x(x-1)(x-lambda)), u >= 1, lambda <= u.
double integral_I(double u, double lambda);
// int_lambda^u dx / sqrt(x(x-1)(x-lambda)) for 1 < lambda <= u.
double integral_to(double lambda, double u);

BettiCoords betti_billiard(const Ellipse& e, double lambda);

// beta2 at lambda = 1 - eps (hyperbolic side) or 1 + eps (elliptic side),
// accurate for eps far below double resolution around 1.
double beta2_near_focal(const Ellipse& e, double eps, bool elliptic_side);

// lambda on the chosen side of 1 with beta2(lambda) = target; target must
// lie strictly between the side's limit values.
double lambda_for_beta2(const Ellipse& e, double target, bool elliptic_side);

// Empirical winding number of the boundary circle map over n_iter bounces.
double rotation_number(const Ellipse& e, const CausticParam& s, long n_iter);

struct DerivativeEstimate {
    double d1 = 0, d2 = 0;
    double d2_unextrapolated = 0;
};

template <class F>
DerivativeEstimate richardson_derivatives(F f, double x, double h) {
    double f0 = f(x), fp = f(x + h), fm = f(x - h), fp2 = f(x + 2 * h), fm2 = f(x - 2 * h);
    double d1h = (fp - fm) / (2 * h), d12h = (fp2 - fm2) / (4 * h);
    double d2h = (fp - 2 * f0 + fm) / (h * h), d22h = (fp2 - 2 * f0 + fm2) / (4 * h * h);
    return {(4 * d1h - d12h) / 3, (4 * d2h - d22h) / 3, d2h};
}

// |Gamma omega2| with Gamma = l(1-l) D^2 + (1-2l) D - 1/4.
double picard_fuchs_residual(double lambda, double h = 1e-4);
double picard_fuchs_residual_plain(double lambda, double h);

// Elliptic logarithm l(lambda) = beta2 * omega2 of the billiard section.
double elliptic_logarithm(const Ellipse& e, double lambda);
// Gamma applied to the elliptic logarithm by finite differences.
double gauss_legendre_on_logarithm(const Ellipse& e, double lambda, double h = 1e-4);
// Closed form 2c sqrt(1-c^2) (1-c^2 lambda)^(-3/2) quoted for Gamma l.
double manin_closed_form(const Ellipse& e, double lambda);
// |Gamma l - closed form|.
double manin_residual(const Ellipse& e, double lambda, double h = 1e-4);

}  // namespace caustica
