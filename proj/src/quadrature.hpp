#pragma once

// Thin wrappers over Boost.Math quadrature so call sites stay uniform.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>

namespace caustica::detail {

// Adaptive Gauss-Kronrod (G10/K21) for smooth integrands; infinite limits
// are mapped internally. Finite intervals are rescaled to [0,1]: on very
// short raw intervals Boost's error estimate never meets the tolerance and
// the recursion runs to full depth.
template <class F>
double integrate_smooth(F f, double a, double b, double rel_tol = 1e-14, double* err = nullptr) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    double e = 0, v;
    if (std::isfinite(a) && std::isfinite(b)) {
        const double w = b - a;
        v = GK::integrate([&](double x) { return f(a + w * x) * w; }, 0.0, 1.0, 20, rel_tol, &e);
    } else {
        v = GK::integrate(f, a, b, 20, rel_tol, &e);
    }
    if (err) *err = e;
    return v;
}

// Double-exponential rule for integrands with integrable endpoint
// singularities.  One rule per thread: its abscissa tables grow lazily.
template <class F>
double integrate_endpoint_singular(F f, double a, double b, double rel_tol = 1e-13) {
    thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
    return rule.integrate(f, a, b, rel_tol);
}

}  // namespace caustica::detail
