#include "caustica/periods.hpp"

#include <cmath>
#include <limits>

#include <boost/math/constants/constants.hpp>
#include <boost/math/tools/roots.hpp>

#include "quadrature.hpp"

namespace caustica {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive_lambda(double lambda) {
    if (!(lambda > 0.0) || lambda == 1.0 || !std::isfinite(lambda))
        throw PreconditionError("bad-lambda", "lambda must be positive and different from 1");
}

void require_unit_interval(double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw PreconditionError("bad-lambda", "lambda must lie in (0,1)");
}

}  // namespace

double agm(double a, double b) {
    for (int i = 0; i < 200 && std::abs(a - b) > 4e-16 * std::abs(a); ++i) {
        double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return 0.5 * (a + b);
}

double omega2(double lambda) {
    require_positive_lambda(lambda);
    if (lambda < 1.0) return kPi / agm(1.0, std::sqrt(1.0 - lambda));
    return kPi / agm(std::sqrt(lambda), std::sqrt(lambda - 1.0));
}

double omega2_quadrature(double lambda) {
    require_positive_lambda(lambda);
    if (lambda < 1.0) return integral_I(1.0, lambda);
    // int_0^1 split at 1/2; x = t^2 near 0 and x = 1 - t^2 near 1.
    const double h = std::sqrt(0.5);
    double left = detail::integrate_smooth(
        [&](double t) { return 2.0 / std::sqrt((1.0 - t * t) * (lambda - t * t)); }, 0.0, h);
    double right = detail::integrate_smooth(
        [&](double t) { return 2.0 / std::sqrt((1.0 - t * t) * (lambda - 1.0 + t * t)); }, 0.0, h);
    return left + right;
}

double omega2_inverted(double lambda) {
    if (!(lambda > 1.0)) throw PreconditionError("bad-lambda", "inverted evaluation needs lambda > 1");
    return omega2(1.0 / lambda) / std::sqrt(lambda);
}

std::complex<double> omega1(double lambda) {
    require_unit_interval(lambda);
    return {0.0, kPi / agm(1.0, std::sqrt(lambda))};
}

std::complex<double> omega1_quadrature(double lambda) {
    require_unit_interval(lambda);
    // x = -t^2 on (-inf, 0].
    double v = detail::integrate_smooth(
        [&](double t) { return 2.0 / std::sqrt((1.0 + t * t) * (lambda + t * t)); }, 0.0, kInf);
    return {0.0, v};
}

PeriodPair periods(double lambda) { return {omega1(lambda), omega2(lambda)}; }

double integral_I(double u, double lambda) {
    if (!(u >= 1.0) || !(lambda <= u) || (u == 1.0 && lambda == 1.0))
        throw PreconditionError("divergent", "integral_I needs u >= 1, lambda <= u and not u = lambda = 1");
    const double p = u - 1.0, q = u - lambda;
    // x = u + t^2; the factor t cancels against whichever of p, q vanishes.
    auto f = [&](double t) {
        double t2 = t * t;
        if (p == 0.0) return 2.0 / std::sqrt((u + t2) * (q + t2));
        if (q == 0.0) return 2.0 / std::sqrt((u + t2) * (p + t2));
        return 2.0 * t / std::sqrt((u + t2) * (p + t2) * (q + t2));
    };
    // Breakpoints at the scales where the integrand changes shape. Nearly
    // coincident ones are dropped: Gauss-Kronrod stalls on slivers.
    double head = 0.0, lo = 0.0;
    for (double s : {std::sqrt(std::min(p, q)), std::sqrt(std::max(p, q)), 1.0}) {
        if (s >= 1.0 || (s > 1.5 * lo && s < 1.0 / 1.5)) {
            s = std::min(s, 1.0);
            if (s > lo) head += detail::integrate_smooth(f, lo, s);
            lo = s;
            if (s == 1.0) break;
        }
    }
    return head + detail::integrate_smooth(f, lo, kInf);
}

double integral_to(double lambda, double u) {
    if (!(lambda > 1.0) || !(u >= lambda)) throw PreconditionError("bad-range", "integral_to needs 1 < lambda <= u");
    if (u == lambda) return 0.0;
    const double p = lambda - 1.0;
    auto f = [&](double t) { return 2.0 / std::sqrt((lambda + t * t) * (p + t * t)); };
    const double top = std::sqrt(u - lambda);
    double acc = 0.0, lo = 0.0;
    for (double s = std::sqrt(p); s < top; s *= 8.0) {
        acc += detail::integrate_smooth(f, lo, s);
        lo = s;
    }
    return acc + detail::integrate_smooth(f, lo, top);
}

BettiCoords betti_billiard(const Ellipse& e, double lambda) {
    const double u = 1.0 / e.c2();
    if (!(lambda > 0.0 && lambda < u) || lambda == 1.0)
        throw PreconditionError("bad-lambda", "lambda must lie in (0, 1/c^2) and differ from 1");
    BettiCoords out;
    out.near_focal = std::abs(lambda - 1.0) < kFocalGuard;
    double w2 = omega2(lambda);
    if (lambda < 1.0) {
        out.beta1 = 0.5;
        out.beta2 = 0.5 - integral_I(u, lambda) / (2.0 * w2);
    } else {
        out.beta1 = 0.0;
        // Both forms are exact; each is used where its quadrature is benign.
        if (lambda < 0.5 * (1.0 + u))
            out.beta2 = 0.5 - integral_I(u, lambda) / (2.0 * w2);
        else
            out.beta2 = integral_to(lambda, u) / (2.0 * w2);
    }
    return out;
}

double beta2_near_focal(const Ellipse& e, double eps, bool elliptic_side) {
    if (!(eps > 0.0)) throw PreconditionError("bad-lambda", "eps must be positive");
    const double u = 1.0 / e.c2();
    double lambda = elliptic_side ? 1.0 + eps : 1.0 - eps;
    double w2 = elliptic_side ? kPi / agm(std::sqrt(1.0 + eps), std::sqrt(eps))
                              : kPi / agm(1.0, std::sqrt(eps));
    double I = (lambda == 1.0) ? integral_I(u, 1.0) : integral_I(u, lambda);
    return 0.5 - I / (2.0 * w2);
}

double lambda_for_beta2(const Ellipse& e, double target, bool elliptic_side) {
    const double u = 1.0 / e.c2();
    const double far = elliptic_side ? u - 1.0 : 1.0;
    // Solve in log(eps), eps = |lambda - 1|: beta2 moves logarithmically near 1.
    auto f = [&](double x) {
        double eps = std::exp(x);
        double b = eps < 1e-3 ? beta2_near_focal(e, eps, elliptic_side)
                              : betti_billiard(e, elliptic_side ? 1.0 + eps : 1.0 - eps).beta2;
        return b - target;
    };
    double lo = std::log(1e-300), hi = std::log(far * (1.0 - 1e-12));
    double flo = f(lo), fhi = f(hi);
    if (!(flo > 0 && fhi < 0)) throw PreconditionError("bad-target", "target outside the Betti range of this side");
    boost::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
    double eps = std::exp(0.5 * (r.first + r.second));
    return elliptic_side ? 1.0 + eps : 1.0 - eps;
}

double rotation_number(const Ellipse& e, const CausticParam& s, long n_iter) {
    if (s.kind != CausticKind::Elliptic)
        throw PreconditionError("not-elliptic", "rotation number needs an elliptic caustic");
    if (n_iter < 1) throw PreconditionError("bad-count", "n_iter must be positive");
    constexpr double two_pi = 2.0 * kPi;
    Vec2 q = e.point_at(0.1234);
    PhasePoint x{q, circulating_direction(e, s.s, q, true)};
    double prev = boundary_angle(e, x.p), total = 0.0;
    for (long i = 0; i < n_iter; ++i) {
        x = advance(e, x);
        double a = boundary_angle(e, x.p);
        double d = std::fmod(a - prev, two_pi);
        if (d < 0) d += two_pi;
        total += d;
        prev = a;
    }
    return total / (two_pi * static_cast<double>(n_iter));
}

static double pf_apply(double lambda, const DerivativeEstimate& d, double f0, bool extrapolated) {
    double d2 = extrapolated ? d.d2 : d.d2_unextrapolated;
    return lambda * (1.0 - lambda) * d2 + (1.0 - 2.0 * lambda) * d.d1 - 0.25 * f0;
}

double picard_fuchs_residual(double lambda, double h) {
    if (!(lambda - 2 * h > 0.0 && lambda + 2 * h < 1.0))
        throw PreconditionError("bad-step", "lambda +- 2h must stay inside (0,1)");
    auto d = richardson_derivatives([](double l) { return omega2(l); }, lambda, h);
    if (std::abs(d.d2 - d.d2_unextrapolated) > 1e-2 * std::max(1.0, std::abs(d.d2)))
        throw PreconditionError("bad-step", "finite-difference step too large for the tolerance");
    return std::abs(pf_apply(lambda, d, omega2(lambda), true));
}

double picard_fuchs_residual_plain(double lambda, double h) {
    if (!(lambda - 2 * h > 0.0 && lambda + 2 * h < 1.0))
        throw PreconditionError("bad-step", "lambda +- 2h must stay inside (0,1)");
    auto d = richardson_derivatives([](double l) { return omega2(l); }, lambda, h);
    double d1 = (omega2(lambda + h) - omega2(lambda - h)) / (2 * h);
    return std::abs(lambda * (1.0 - lambda) * d.d2_unextrapolated + (1.0 - 2.0 * lambda) * d1 - 0.25 * omega2(lambda));
}

double elliptic_logarithm(const Ellipse& e, double lambda) {
    return betti_billiard(e, lambda).beta2 * omega2(lambda);
}

double gauss_legendre_on_logarithm(const Ellipse& e, double lambda, double h) {
    const double u = 1.0 / e.c2();
    bool hyper = lambda < 1.0;
    double lo = hyper ? 0.0 : 1.0, hi = hyper ? 1.0 : u;
    if (!(lambda - 2 * h > lo && lambda + 2 * h < hi))
        throw PreconditionError("bad-step", "lambda +- 2h must stay on one branch of the logarithm");
    auto d = richardson_derivatives([&](double l) { return elliptic_logarithm(e, l); }, lambda, h);
    if (std::abs(d.d2 - d.d2_unextrapolated) > 1e-3 * std::max(1.0, std::abs(d.d2)))
        throw ConvergenceError("branch discontinuity in the elliptic logarithm");
    return pf_apply(lambda, d, elliptic_logarithm(e, lambda), true);
}

double manin_closed_form(const Ellipse& e, double lambda) {
    double c = e.c(), c2 = e.c2();
    return 2.0 * c * std::sqrt(1.0 - c2) * std::pow(1.0 - c2 * lambda, -1.5);
}

double manin_residual(const Ellipse& e, double lambda, double h) {
    return std::abs(gauss_legendre_on_logarithm(e, lambda, h) - manin_closed_form(e, lambda));
}

}  // namespace caustica
