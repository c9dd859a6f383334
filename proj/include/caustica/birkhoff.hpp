#pragma once

#include <vector>

#include "caustica/conics.hpp"

namespace caustica {

// h(p) = 1/(1 - c^2 x^2), the squared gradient norm of the boundary in the
// normalization where cos(alpha) = 1 - 2 (1 - s) h(p).
double h_weight(const Ellipse& e, const Vec2& p);

// cos of the angle between the incoming and outgoing directions at the
// bounce x.p (x.v is the outgoing one).  A retraced chord gives -1.
double bounce_cosine(const Ellipse& e, const PhasePoint& x);

// Sum of bounce cosines at bounces 1..n after start.
double birkhoff_sum(const Ellipse& e, const PhasePoint& start, int n);

// One step backwards: the phase point whose advance is x.
PhasePoint retreat(const Ellipse& e, const PhasePoint& x);

// Sum of bounce cosines at bounces -m..m around center (window 2m+1).
double symmetric_sum(const Ellipse& e, const PhasePoint& center, int m);

// Phase point on the boundary at eccentric anomaly t tangent to caustic s
// (counterclockwise for elliptic caustics, first tangent otherwise).  Empty
// when the caustic is not reachable from that boundary point.
std::vector<PhasePoint> caustic_start(const Ellipse& e, const CausticParam& s, double t);

struct ProfileSample {
    double x, y, sum;
};

// Symmetric window sums of odd length n along the boundary, eccentric
// anomaly t_j = 2 pi j / samples; hyperbolic caustics sample their two
// reachable arcs instead.
std::vector<ProfileSample> symmetric_profile(const Ellipse& e, const CausticParam& s, int n, int samples);

struct MoebiusFit {
    double a = 0, b = 0, c = 0, d = 0;  // (a t + b)/(c t + d), t = x^2, unit norm
    double det = 0;                     // ad - bc
    double residual = 0;                // max deviation over all samples
    int samples = 0;
    double eval(double t) const { return (a * t + b) / (c * t + d); }
};

// Distance of n*beta2 from the integers; zero on periodic caustics.
double periodicity_gap(const Ellipse& e, const CausticParam& s, int n);

MoebiusFit moebius_fit(const Ellipse& e, const CausticParam& s, int n, int samples);

struct ProfileExtrema {
    double x_at_max = 0, x_at_min = 0;
    double max = 0, min = 0;
};
ProfileExtrema profile_extrema(const Ellipse& e, const CausticParam& s, int n, int grid = 4000);

// Solutions of symmetric_sum = value on the semi-ellipse t in [0, pi).
int value_multiplicity(const Ellipse& e, const CausticParam& s, int n, double value, int grid = 4000);

}  // namespace caustica
