#pragma once

// Orbits of a plane projective automorphism meeting three lines, in exact
// rational arithmetic.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/gmp.hpp>

#include "caustica/error.hpp"
#include "json.hpp"

namespace caustica::dml {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;
using Vec3 = std::array<Rational, 3>;
using Mat3 = std::array<Vec3, 3>;

Rational parse_rational(const std::string& text);  // "p", "p/q" or a finite decimal
std::string to_string(const Rational& q);

Rational determinant(const Mat3& m);
Mat3 multiply(const Mat3& a, const Mat3& b);
Mat3 identity();
// Adjugate: the inverse up to the scalar det.
Mat3 adjugate(const Mat3& m);
// Exact power; negative exponents use the true inverse.
Mat3 power(const Mat3& m, long k);
Vec3 row_times(const Vec3& row, const Mat3& m);
Vec3 cross(const Vec3& a, const Vec3& b);
Rational dot(const Vec3& a, const Vec3& b);
bool is_zero(const Vec3& v);
// Scaled to coprime integers with the first nonzero entry positive.
Vec3 primitive(const Vec3& v);
Mat3 primitive(const Mat3& m);

class ProjectiveMap {
public:
    explicit ProjectiveMap(Mat3 m);
    const Mat3& matrix() const { return m_; }

private:
    Mat3 m_;
};

class ProjectiveLine {
public:
    explicit ProjectiveLine(Vec3 c);
    const Vec3& coeffs() const { return c_; }

private:
    Vec3 c_;
};

enum class GroupClass { Finite, Ga, Gm, GaGm, Gm2, Undetermined };
std::string to_string(GroupClass g);

struct Eigenvalue {
    std::string exact;  // "2", "1/3", "(1 + 1*sqrt(5))/2"-style text
    double re = 0, im = 0;
    int algebraic = 1, geometric = 1;
    std::optional<Rational> value;  // set when rational
};

struct Classification {
    GroupClass group = GroupClass::Undetermined;
    std::vector<Eigenvalue> eigenvalues;
    int torus_rank = -1;    // rank of the multiplicative group of normalized eigenvalues
    bool unipotent = false; // a nontrivial Jordan block survives normalization
    bool rigorous = true;   // false only for the numeric log-lattice heuristic
    std::string witness;
};

Classification classify(const ProjectiveMap& beta);

// det of the rows L1, L2 beta^m, L3 beta^n; zero iff L1, beta^-m L2,
// beta^-n L3 are concurrent.
Rational det_condition(const ProjectiveMap& beta, const ProjectiveLine& L1, const ProjectiveLine& L2,
                       const ProjectiveLine& L3, long m, long n);

struct OrbitHit {
    long m = 0, n = 0;
    Vec3 P;  // primitive integer coordinates
    // Two of the three lines coincide, so P is one choice on a common line.
    bool coincident = false;
};

struct SearchOptions {
    bool check_orbit_distinctness = true;
    int threads = 1;
};

class OrbitDistinctnessError : public PreconditionError {
public:
    OrbitDistinctnessError(int i, int j, long shift);
    int first() const { return i_; }
    int second() const { return j_; }
    long shift() const { return k_; }

private:
    int i_, j_;
    long k_;
};

// Lines i, j (0-based) with L_j proportional to L_i beta^k for some |k| <= bound.
struct OrbitCoincidence {
    int i, j;
    long shift;
};
std::optional<OrbitCoincidence> find_orbit_coincidence(const ProjectiveMap& beta,
                                                       const std::array<ProjectiveLine, 3>& lines, long bound);

std::vector<OrbitHit> triple_orbit_search(const ProjectiveMap& beta, const std::array<ProjectiveLine, 3>& lines,
                                          long N, const SearchOptions& opt = {});

struct FamilyReport {
    enum class Kind { FiniteSet, LineFamily, ExponentialFamily, Undetermined } kind = Kind::FiniteSet;
    // LineFamily: u m + v n = w.
    Integer u, v, w;
    // ExponentialFamily: m = A lambda^n + B n + C.
    Rational A, lambda, B, C;
    std::vector<std::pair<long, long>> support;
    int unexplained = 0;  // non-coincident hits off the family
    int coincident = 0;   // hits skipped because two lines coincide
};
std::string to_string(FamilyReport::Kind k);

FamilyReport family_detect(const std::vector<OrbitHit>& hits, const ProjectiveMap& beta,
                           const std::array<ProjectiveLine, 3>& lines);

struct FixedPointReport {
    std::vector<Vec3> points;     // fixed points on L (primitive)
    bool line_pointwise_fixed = false;
};
FixedPointReport fixed_point_check(const ProjectiveMap& beta, const ProjectiveLine& L);

struct Progression {
    long modulus, residue, first;
};
struct RecurrenceReport {
    Rational a, b, c;  // u_{m+3} = a u_{m+2} + b u_{m+1} + c u_m
    std::vector<Rational> values;
    std::vector<long> zeros;
    std::vector<Progression> progressions;
    std::vector<long> sporadic;  // zeros outside every progression
};
RecurrenceReport recurrence_zeros(const ProjectiveMap& T, long N);

// {"matrix": [[..]x3], "lines": [[..]x3], "range": N, "check_orbits": bool}
struct Problem {
    ProjectiveMap beta;
    std::array<ProjectiveLine, 3> lines;
    long range = 0;
    bool check_orbits = true;
};
Problem parse_problem(const nlohmann::json& j);
nlohmann::json to_json(const Classification& c);
nlohmann::json to_json(const OrbitHit& h);
nlohmann::json to_json(const FamilyReport& f);
nlohmann::json to_json(const RecurrenceReport& r);

}  // namespace caustica::dml
