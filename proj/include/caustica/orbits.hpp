#pragma once

#include <complex>
#include <cstdint>
#include <tuple>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "caustica/conics.hpp"

namespace caustica {

struct CausticExtrema {
    double M = 0;  // elliptic confocal conic through p
    double m = 0;  // hyperbolic confocal conic through p
};

CausticExtrema caustic_extrema(const Ellipse& e, const Vec2& p);

// s along the direction of angle theta: A + R cos(2 theta - phi).
struct CausticSinusoid {
    double A = 0, R = 0, phi = 0;
    double at(double theta) const;
    // The (up to two) theta in [0, pi) with s(theta) = sigma.
    std::vector<double> solve(double sigma) const;
};

CausticSinusoid caustic_sinusoid(const Ellipse& e, const Vec2& p);

struct CountingConstants {
    double odd = 0;   // 2 - 4 beta2(M/c^2)
    double even = 0;  // 2 (1 - beta2(M/c^2) - beta2(m/c^2))
    bool closed_form = false;
};

// Closed-form constants when p is off both axes, total-variation fallback
// otherwise.
CountingConstants counting_constants(const Ellipse& e, const Vec2& p);
// Total variation of the admissible Betti coordinate over the direction
// circle (odd: elliptic directions only), by direct numerical integration.
double total_variation_constant(const Ellipse& e, const Vec2& p, bool odd, int cells = 20000);
double predicted_count(const Ellipse& e, const Vec2& p, int n);

struct PeriodicDirection {
    Vec2 direction;
    int period = 0;
    CausticParam caustic;
    double closure_error = 0;
    int precision_bits = 53;  // precision used for the certificate
    double angle = 0;         // direction angle in [0, 2 pi)
    std::string angle_text;   // full-precision angle when precision_bits > 53
};

// Misfit after n bounces: distance of p from the n-th segment line plus the
// direction mismatch.
double closure_error(const Ellipse& e, const Shot& sh, int n);

// Re-simulates the direction at its recorded precision.
double recertify(const Ellipse& e, const Vec2& p, const PeriodicDirection& d);

// All directions from p whose trajectory returns to (p, v) after n bounces
// (period dividing n), sorted by direction angle in [0, 2 pi).
std::vector<PeriodicDirection> find_periodic_directions(const Ellipse& e, const Vec2& p, int n,
                                                        double certify_tol = 1e-6);

// Same search with the Betti roots cached across calls, for sweeps over n.
class PeriodicSearch {
public:
    PeriodicSearch(const Ellipse& e, const Vec2& p);
    std::vector<PeriodicDirection> directions(int n, double certify_tol = 1e-6);
    // Exact count formula from the Betti ranges (no simulation).
    long long betti_count(int n) const;
    // Roots that fell below the double-precision floor for |lambda - 1|.
    int unresolved() const { return unresolved_; }

private:
    double focal_offset(long long k, long long n, bool elliptic);
    Ellipse e_;
    Vec2 p_;
    double S_, P_, M_, m_;
    double beta_M_, beta_m_;
    std::map<std::tuple<long long, long long, bool>, double> roots_;
    int unresolved_ = 0;
};

struct ConnectOptions {
    int starts = 8;
    std::uint64_t seed = 1;
    int max_sweeps = 20000;
    double gain_tol = 1e-14;
};

// Trajectory from p1 to p2 with n-1 interior bounces maximizing length.
// states[i] = (x_{i+1}, outgoing direction); caustic from the first segment.
Trajectory connecting_trajectory(const Ellipse& e, const Vec2& p1, const Vec2& p2, int n,
                                 const ConnectOptions& opt = {});
std::vector<Vec2> connecting_vertices(const Ellipse& e, const Vec2& p1, const Vec2& p2, const Trajectory& t);
double path_length(const std::vector<Vec2>& pts);
// Max over interior vertices of |angle_in - angle_out| w.r.t. the tangent.
double reflection_residual(const Ellipse& e, const std::vector<Vec2>& pts);

class ConnectError : public ConvergenceError {
public:
    ConnectError(const std::string& what, Trajectory best) : ConvergenceError(what), best_(std::move(best)) {}
    const Trajectory& best() const { return best_; }

private:
    Trajectory best_;
};

struct ScanOptions {
    int cells = 4096;
    int threads = 1;
};

enum class BoomerangType { Periodic = 1, Reversed = 2, OtherTangent = 3 };

struct BoomerangShot {
    Vec2 direction;
    double angle = 0;
    int bounce = 0;  // segment index k: the chord after k bounces passes p
    BoomerangType type = BoomerangType::OtherTangent;
    double distance = 0;
};

// Signed distance of p from the chord leaving the k-th bounce (k = 0 is the
// shot itself).
double segment_offset(const Ellipse& e, const Vec2& from, double angle, int k, const Vec2& target);

std::vector<BoomerangShot> boomerang_scan(const Ellipse& e, const Vec2& p, int n_max, double tol,
                                          const ScanOptions& opt = {});

struct HoleShot {
    Vec2 direction;
    double angle = 0;
    int ball_segment = 0;  // chord index carrying p1 through p2
    int hole_bounce = 0;   // bounce index landing on h
    double ball_distance = 0, hole_distance = 0;
};

struct HoleScanResult {
    std::vector<HoleShot> shots;
    bool focal_exception = false;  // p1, p2 are the foci: every hole shot qualifies
};

HoleScanResult hole_scan(const Ellipse& e, const Vec2& p1, const Vec2& p2, const Vec2& h, int n_max, double tol,
                         const ScanOptions& opt = {});

struct AnglePair {
    PeriodicDirection first, second;
    double angle_mismatch = 0;
};

std::vector<AnglePair> angle_pair_scan(const Ellipse& e, const Vec2& p, double alpha, int n_max, double tol);

struct LatticePair {
    long long a1, b1, a2, b2;  // lambda = a1 tau + b1, delta = a2 tau + b2
    double mismatch = 0;
};

struct LatticePairResult {
    std::vector<LatticePair> pairs;
    bool quadratic_tau = false;  // tau satisfies an integral quadratic (small height)
    std::vector<long long> quadratic;  // (A,B,C) with A tau^2 + B tau + C = 0
};

LatticePairResult parallelogram_angle_pairs(std::complex<double> tau, double alpha, int H);

// beta2 along the direction angle on the elliptic arcs; used to expose the
// non-monotonicity of the slope parametrization.
struct SlopeSample {
    double theta, s, beta2;
    bool elliptic;
};
std::vector<SlopeSample> betti_along_directions(const Ellipse& e, const Vec2& p, int samples);
// Number of sign changes of d(beta2)/d(theta) inside each maximal
// elliptic arc of the direction circle.
std::vector<int> elliptic_interval_turns(const Ellipse& e, const Vec2& p, int samples = 4000);

}  // namespace caustica
