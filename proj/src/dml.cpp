#include "caustica/dml.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <sstream>

#include "parallel.hpp"

namespace caustica::dml {

namespace {

using boost::multiprecision::denominator;
using boost::multiprecision::numerator;

Integer iabs(const Integer& x) { return x < 0 ? Integer(-x) : x; }

Integer igcd(const Integer& a, const Integer& b) { return boost::multiprecision::gcd(iabs(a), iabs(b)); }

Integer ilcm(const Integer& a, const Integer& b) {
    if (a == 0 || b == 0) return Integer(0);
    return iabs(a) / igcd(a, b) * iabs(b);
}

bool perfect_square(const Integer& x, Integer& root) {
    if (x < 0) return false;
    root = boost::multiprecision::sqrt(x);
    return root * root == x;
}

bool rational_square(const Rational& q, Rational& root) {
    Integer rn, rd;
    if (!perfect_square(numerator(q), rn) || !perfect_square(denominator(q), rd)) return false;
    root = Rational(rn, rd);
    return true;
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

// Rank and reduced row echelon form over Q.
int rank_of(std::vector<std::vector<Rational>> a, std::vector<std::vector<Rational>>* rref = nullptr,
            std::vector<int>* pivots = nullptr) {
    const size_t rows = a.size(), cols = rows ? a[0].size() : 0;
    size_t r = 0;
    std::vector<int> piv;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t p = r;
        while (p < rows && a[p][c] == 0) ++p;
        if (p == rows) continue;
        std::swap(a[r], a[p]);
        Rational inv = 1 / a[r][c];
        for (auto& x : a[r]) x *= inv;
        for (size_t i = 0; i < rows; ++i)
            if (i != r && a[i][c] != 0) {
                Rational f = a[i][c];
                for (size_t j = 0; j < cols; ++j) a[i][j] -= f * a[r][j];
            }
        piv.push_back(static_cast<int>(c));
        ++r;
    }
    if (rref) *rref = a;
    if (pivots) *pivots = piv;
    return static_cast<int>(r);
}

std::vector<std::vector<Rational>> as_rows(const Mat3& m) {
    std::vector<std::vector<Rational>> out(3, std::vector<Rational>(3));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[i][j] = m[i][j];
    return out;
}

Mat3 shifted(const Mat3& m, const Rational& mu) {
    Mat3 out = m;
    for (int i = 0; i < 3; ++i) out[i][i] -= mu;
    return out;
}

// Basis of the right null space of m over Q.
std::vector<Vec3> null_space(const Mat3& m) {
    std::vector<std::vector<Rational>> R;
    std::vector<int> piv;
    rank_of(as_rows(m), &R, &piv);
    std::vector<Vec3> basis;
    for (int free = 0; free < 3; ++free) {
        if (std::find(piv.begin(), piv.end(), free) != piv.end()) continue;
        Vec3 v{Rational(0), Rational(0), Rational(0)};
        v[free] = 1;
        for (size_t r = 0; r < piv.size(); ++r) v[piv[r]] = -R[r][free];
        basis.push_back(v);
    }
    return basis;
}

// a + b sqrt(D), D a non-square rational.
struct Quad {
    Rational a, b, D;
    Quad operator*(const Quad& o) const { return {a * o.a + b * o.b * D, a * o.b + b * o.a, D}; }
    Quad scaled(const Rational& k) const { return {a * k, b * k, D}; }
    bool is_one() const { return a == 1 && b == 0; }
    Quad pow(int k) const {
        Quad r{Rational(1), Rational(0), D};
        for (int i = 0; i < k; ++i) r = r * *this;
        return r;
    }
};

// Rank modulo torsion of the multiplicative group generated by nonzero rationals.
int multiplicative_rank(const std::vector<Rational>& xs) {
    std::vector<Integer> base;
    auto add = [&](Integer n) {
        n = iabs(n);
        if (n > 1) base.push_back(n);
    };
    for (const auto& x : xs) {
        add(numerator(x));
        add(denominator(x));
    }
    // Refine to a pairwise coprime base without factoring.
    bool changed = true;
    while (changed) {
        changed = false;
        std::sort(base.begin(), base.end());
        base.erase(std::unique(base.begin(), base.end()), base.end());
        for (size_t i = 0; i < base.size() && !changed; ++i)
            for (size_t j = i + 1; j < base.size() && !changed; ++j) {
                Integer g = igcd(base[i], base[j]);
                if (g == 1) continue;
                Integer a = base[i] / g, b = base[j] / g;
                base.erase(base.begin() + static_cast<long>(j));
                base.erase(base.begin() + static_cast<long>(i));
                for (const Integer& t : {a, b, g})
                    if (t > 1) base.push_back(t);
                changed = true;
            }
    }
    if (base.empty()) return 0;
    auto valuation = [](Integer n, const Integer& p) {
        n = iabs(n);
        long v = 0;
        while (n % p == 0) {
            n /= p;
            ++v;
        }
        return v;
    };
    std::vector<std::vector<Rational>> M;
    for (const auto& x : xs) {
        std::vector<Rational> row;
        for (const auto& p : base) row.emplace_back(valuation(numerator(x), p) - valuation(denominator(x), p));
        M.push_back(row);
    }
    return rank_of(M);
}

std::vector<std::complex<long double>> cubic_roots(long double c2, long double c1, long double c0) {
    // Durand-Kerner on the monic cubic t^3 + c2 t^2 + c1 t + c0.
    using C = std::complex<long double>;
    auto p = [&](C t) { return ((t + c2) * t + c1) * t + c0; };
    std::vector<C> z{C(0.4L, 0.9L), C(0.4L, 0.9L) * C(0.4L, 0.9L), C(0.4L, 0.9L) * C(0.4L, 0.9L) * C(0.4L, 0.9L)};
    long double scale = 1 + std::max({std::abs(c2), std::abs(c1), std::abs(c0)});
    for (auto& x : z) x *= scale;
    for (int it = 0; it < 2000; ++it) {
        long double moved = 0;
        for (size_t i = 0; i < 3; ++i) {
            C den = 1;
            for (size_t j = 0; j < 3; ++j)
                if (j != i) den *= z[i] - z[j];
            if (std::abs(den) == 0) den = 1e-30L;
            C step = p(z[i]) / den;
            z[i] -= step;
            moved = std::max(moved, std::abs(step));
        }
        if (moved < 1e-30L * scale) break;
    }
    return z;
}

// Continued-fraction convergents of x with denominators up to qmax.
std::vector<Rational> convergents(long double x, long double qmax) {
    std::vector<Rational> out;
    Integer h0 = 1, h1 = 0, k0 = 0, k1 = 1;  // h_{-1}, h_{-2}, ...
    long double r = x;
    for (int i = 0; i < 64; ++i) {
        long double a = std::floor(r);
        if (std::abs(a) > 1e18L) break;
        Integer ai(static_cast<long long>(a));
        Integer h = ai * h0 + h1, k = ai * k0 + k1;
        if (k.convert_to<long double>() > qmax) break;
        out.emplace_back(h, k);
        h1 = h0;
        h0 = h;
        k1 = k0;
        k0 = k;
        long double frac = r - a;
        if (frac < 1e-18L) break;
        r = 1 / frac;
    }
    return out;
}

std::string quad_text(const Rational& a, const Rational& b, const Rational& D) {
    std::ostringstream os;
    os << to_string(a) << (b < 0 ? " - " : " + ") << to_string(b < 0 ? Rational(-b) : b) << "*sqrt(" << to_string(D)
       << ")";
    return os.str();
}

}  // namespace

// Decimal digits only: GMP would otherwise read "0125" as octal and "0x.." as hex.
static Integer decimal_integer(const std::string& t) {
    size_t i = (!t.empty() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
    if (i == t.size()) throw std::invalid_argument("no digits");
    for (size_t k = i; k < t.size(); ++k)
        if (!std::isdigit(static_cast<unsigned char>(t[k]))) throw std::invalid_argument("not a digit");
    size_t first = t.find_first_not_of('0', i);
    Integer v(first == std::string::npos ? std::string("0") : t.substr(first));
    return t[0] == '-' ? Integer(-v) : v;
}

Rational parse_rational(const std::string& raw) {
    std::string t;
    for (char ch : raw)
        if (!std::isspace(static_cast<unsigned char>(ch))) t += ch;
    if (t.empty()) throw PreconditionError("bad-rational", "empty rational literal");
    try {
        if (auto slash = t.find('/'); slash != std::string::npos) {
            Integer p = decimal_integer(t.substr(0, slash)), q = decimal_integer(t.substr(slash + 1));
            if (q == 0) throw PreconditionError("bad-rational", "zero denominator in '" + raw + "'");
            return Rational(p, q);
        }
        if (auto dot = t.find('.'); dot != std::string::npos) {
            std::string digits = t.substr(0, dot) + t.substr(dot + 1);
            if (digits == "-" || digits == "+" || digits.empty()) throw PreconditionError("bad-rational", raw);
            Integer p = decimal_integer(digits);
            Integer q = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(t.size() - dot - 1));
            return Rational(p, q);
        }
        return Rational(decimal_integer(t));
    } catch (const PreconditionError&) {
        throw;
    } catch (const std::exception&) {
        throw PreconditionError("bad-rational", "cannot parse rational '" + raw + "'");
    }
}

std::string to_string(const Rational& q) {
    if (denominator(q) == 1) return numerator(q).str();
    return numerator(q).str() + "/" + denominator(q).str();
}

Rational determinant(const Mat3& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Mat3 multiply(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
    return r;
}

Mat3 identity() {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[i][j] = i == j ? 1 : 0;
    return r;
}

Mat3 adjugate(const Mat3& m) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
            r[i][j] = m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        }
    return r;
}

Mat3 power(const Mat3& m, long k) {
    Mat3 base = m;
    if (k < 0) {
        Rational d = determinant(m);
        if (d == 0) throw PreconditionError("singular", "matrix is not invertible");
        base = adjugate(m);
        for (auto& row : base)
            for (auto& x : row) x /= d;
        k = -k;
    }
    Mat3 acc = identity();
    while (k > 0) {
        if (k & 1) acc = multiply(acc, base);
        base = multiply(base, base);
        k >>= 1;
    }
    return acc;
}

Vec3 row_times(const Vec3& row, const Mat3& m) {
    Vec3 r;
    for (int j = 0; j < 3; ++j) r[j] = row[0] * m[0][j] + row[1] * m[1][j] + row[2] * m[2][j];
    return r;
}

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Rational dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

bool is_zero(const Vec3& v) { return v[0] == 0 && v[1] == 0 && v[2] == 0; }

Vec3 primitive(const Vec3& v) {
    if (is_zero(v)) return v;
    Integer L = 1;
    for (const auto& x : v) L = ilcm(L, denominator(x));
    Integer g = 0;
    std::array<Integer, 3> n;
    for (int i = 0; i < 3; ++i) {
        n[i] = numerator(Rational(v[i] * L));
        g = igcd(g, n[i]);
    }
    int sgn = 0;
    for (const auto& x : n)
        if (x != 0) {
            sgn = x < 0 ? -1 : 1;
            break;
        }
    Vec3 out;
    for (int i = 0; i < 3; ++i) out[i] = Rational(n[i] / g * sgn);
    return out;
}

Mat3 primitive(const Mat3& m) {
    Integer L = 1, g = 0;
    for (const auto& row : m)
        for (const auto& x : row) L = ilcm(L, denominator(x));
    for (const auto& row : m)
        for (const auto& x : row) g = igcd(g, numerator(Rational(x * L)));
    if (g == 0) return m;
    Mat3 out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[i][j] = Rational(numerator(Rational(m[i][j] * L)) / g);
    return out;
}

ProjectiveMap::ProjectiveMap(Mat3 m) : m_(std::move(m)) {
    if (determinant(m_) == 0) throw PreconditionError("singular", "projective map needs a nonzero determinant");
}

ProjectiveLine::ProjectiveLine(Vec3 c) : c_(std::move(c)) {
    if (is_zero(c_)) throw PreconditionError("zero-line", "line coefficients must not all vanish");
}

std::string to_string(GroupClass g) {
    switch (g) {
        case GroupClass::Finite: return "Finite";
        case GroupClass::Ga: return "Ga";
        case GroupClass::Gm: return "Gm";
        case GroupClass::GaGm: return "GaGm";
        case GroupClass::Gm2: return "Gm2";
        case GroupClass::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

std::string to_string(FamilyReport::Kind k) {
    switch (k) {
        case FamilyReport::Kind::FiniteSet: return "FiniteSet";
        case FamilyReport::Kind::LineFamily: return "LineFamily";
        case FamilyReport::Kind::ExponentialFamily: return "ExponentialFamily";
        case FamilyReport::Kind::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

Classification classify(const ProjectiveMap& beta) {
    const Mat3& m = beta.matrix();
    Rational tr = m[0][0] + m[1][1] + m[2][2];
    Rational minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0] +
                      m[1][1] * m[2][2] - m[1][2] * m[2][1];
    Rational det = determinant(m);
    // t^3 - tr t^2 + minors t - det
    auto charpoly = [&](const Rational& t) { return ((t - tr) * t + minors) * t - det; };

    Classification out;
    Integer a3 = ilcm(ilcm(denominator(tr), denominator(minors)), denominator(det));
    auto roots = cubic_roots(static_cast<long double>(-to_double(tr)), static_cast<long double>(to_double(minors)),
                             static_cast<long double>(-to_double(det)));
    std::optional<Rational> r1;
    // A repeated root is rational and also a root of 3t^2 - 2 tr t + minors;
    // numerically it is only resolved to a cube or square root of epsilon.
    Rational dsq;
    if (rational_square(4 * tr * tr - 12 * minors, dsq))
        for (const Rational& cand : {Rational((2 * tr + dsq) / 6), Rational((2 * tr - dsq) / 6)})
            if (!r1 && charpoly(cand) == 0) r1 = cand;
    for (const auto& z : roots) {
        if (r1) break;
        if (std::abs(z.imag()) > 1e-6L * std::max<long double>(1, std::abs(z))) continue;
        long double qmax = std::min<long double>(a3.convert_to<long double>(), 1e12L);
        for (const auto& cand : convergents(z.real(), std::max<long double>(qmax, 1)))
            if (charpoly(cand) == 0) {
                r1 = cand;
                break;
            }
        if (!r1 && a3 <= 1000000) {
            long long A = a3.convert_to<long long>();
            for (long long q = 1; q <= A && !r1; ++q) {
                if (A % q) continue;
                Rational cand(Integer(std::llround(static_cast<double>(z.real() * q))), Integer(q));
                if (charpoly(cand) == 0) r1 = cand;
            }
        }
        if (r1) break;
    }

    if (!r1) {
        // Irreducible cubic: only a numeric log-lattice guess.
        out.group = GroupClass::Undetermined;
        out.rigorous = false;
        std::vector<std::complex<long double>> z = roots;
        for (const auto& x : z) {
            Eigenvalue ev;
            ev.re = static_cast<double>(x.real());
            ev.im = static_cast<double>(x.imag());
            ev.exact = "root of t^3 - (" + to_string(tr) + ")t^2 + (" + to_string(minors) + ")t - (" + to_string(det) + ")";
            out.eigenvalues.push_back(ev);
        }
        long double l1 = std::log(std::abs(z[0] / z[2])), l2 = std::log(std::abs(z[1] / z[2]));
        int guess = 2;
        for (int a = -12; a <= 12 && guess == 2; ++a)
            for (int b = -12; b <= 12; ++b)
                if ((a || b) && std::abs(a * l1 + b * l2) < 1e-9L) {
                    guess = (std::abs(l1) < 1e-12L && std::abs(l2) < 1e-12L) ? 0 : 1;
                    break;
                }
        out.torus_rank = guess;
        out.witness = "irreducible cubic characteristic polynomial; numeric log-lattice rank guess " +
                      std::to_string(guess) + " (non-rigorous)";
        return out;
    }

    // Deflate: t^2 + p t + q = charpoly / (t - r1).
    Rational p = *r1 - tr;
    Rational q = minors + *r1 * p;
    Rational D = p * p - 4 * q;
    Rational sq;
    if (rational_square(D, sq)) {
        std::vector<Rational> ev{*r1, (-p + sq) / 2, (-p - sq) / 2};
        std::map<Rational, int> alg;
        for (const auto& x : ev) alg[x]++;
        bool semisimple = true;
        std::vector<std::pair<Rational, int>> blocks;  // value, geometric multiplicity
        for (const auto& [val, a] : alg) {
            int g = 3 - rank_of(as_rows(shifted(m, val)));
            if (g < a) semisimple = false;
            Eigenvalue e;
            e.exact = to_string(val);
            e.re = to_double(val);
            e.algebraic = a;
            e.geometric = g;
            e.value = val;
            out.eigenvalues.push_back(e);
            blocks.push_back({val, g});
        }
        // Normalize by one eigenvalue; ratios of the others carry the torus.
        const Rational ref = out.eigenvalues.back().value.value();
        std::vector<Rational> ratios;
        for (const auto& e : out.eigenvalues)
            if (*e.value != ref) ratios.push_back(*e.value / ref);
        out.torus_rank = multiplicative_rank(ratios);
        out.unipotent = !semisimple;
        std::ostringstream w;
        w << "rational spectrum";
        for (const auto& e : out.eigenvalues) w << " " << e.exact << "(alg " << e.algebraic << ", geo " << e.geometric << ")";
        w << "; torus rank " << out.torus_rank << (semisimple ? ", semisimple" : ", Jordan block");
        out.witness = w.str();
        if (semisimple) {
            out.group = out.torus_rank == 0 ? GroupClass::Finite
                        : out.torus_rank == 1 ? GroupClass::Gm
                                              : GroupClass::Gm2;
        } else {
            out.group = out.torus_rank == 0 ? GroupClass::Ga : GroupClass::GaGm;
        }
        return out;
    }

    // Conjugate quadratic pair mu = (-p +- sqrt(D))/2 next to the rational r1.
    Quad l1{-p / 2 / *r1, Rational(1, 2) / *r1, D};
    Rational N = (l1.a * l1.a - l1.b * l1.b * D);  // l1 * conj(l1)
    bool real_pair = D > 0;
    {
        Eigenvalue e;
        e.exact = to_string(*r1);
        e.re = to_double(*r1);
        e.value = *r1;
        out.eigenvalues.push_back(e);
        for (int sgn : {1, -1}) {
            Eigenvalue z;
            z.exact = quad_text(-p / 2, Rational(sgn, 2), D);
            double sd = std::sqrt(std::abs(to_double(D)));
            z.re = to_double(-p / 2) + (real_pair ? sgn * 0.5 * sd : 0.0);
            z.im = real_pair ? 0.0 : sgn * 0.5 * sd;
            out.eigenvalues.push_back(z);
        }
    }
    // Orders of roots of unity in a quadratic field divide 12.
    int rank;
    if (N == 1 || N == -1) {
        rank = l1.pow(12).is_one() ? 0 : 1;
    } else {
        Quad ratio = (l1 * l1).scaled(1 / N);  // l1 / conj(l1)
        rank = ratio.pow(12).is_one() ? 1 : 2;
    }
    out.torus_rank = rank;
    out.group = rank == 0 ? GroupClass::Finite : rank == 1 ? GroupClass::Gm : GroupClass::Gm2;
    out.witness = std::string(real_pair ? "real" : "imaginary") + " quadratic pair over Q(sqrt(" + to_string(D) +
                  ")), normalized norm " + to_string(N) + "; torus rank " + std::to_string(rank);
    return out;
}

Rational det_condition(const ProjectiveMap& beta, const ProjectiveLine& L1, const ProjectiveLine& L2,
                       const ProjectiveLine& L3, long m, long n) {
    Vec3 r2 = row_times(L2.coeffs(), power(beta.matrix(), m));
    Vec3 r3 = row_times(L3.coeffs(), power(beta.matrix(), n));
    return dot(L1.coeffs(), cross(r2, r3));
}

OrbitDistinctnessError::OrbitDistinctnessError(int i, int j, long shift)
    : PreconditionError("orbit-distinctness",
                        "lines " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                            " share a beta-orbit (L" + std::to_string(j + 1) + " ~ L" + std::to_string(i + 1) +
                            " beta^" + std::to_string(shift) + ")"),
      i_(i),
      j_(j),
      k_(shift) {}

namespace {

// Rows L beta^k for k in [-K, K], each scaled to primitive integers.
std::vector<Vec3> orbit_rows(const Vec3& L, const Mat3& beta, long K) {
    std::vector<Vec3> rows(static_cast<size_t>(2 * K + 1));
    const Mat3 fwd = primitive(beta), back = primitive(adjugate(beta));
    rows[static_cast<size_t>(K)] = primitive(L);
    for (long k = 1; k <= K; ++k) {
        rows[static_cast<size_t>(K + k)] = primitive(row_times(rows[static_cast<size_t>(K + k - 1)], fwd));
        rows[static_cast<size_t>(K - k)] = primitive(row_times(rows[static_cast<size_t>(K - k + 1)], back));
    }
    return rows;
}

}  // namespace

std::optional<OrbitCoincidence> find_orbit_coincidence(const ProjectiveMap& beta,
                                                       const std::array<ProjectiveLine, 3>& lines, long bound) {
    for (int i = 0; i < 3; ++i) {
        auto rows = orbit_rows(lines[i].coeffs(), beta.matrix(), bound);
        for (int j = i + 1; j < 3; ++j) {
            // Scan outward so the smallest shift is reported.
            for (long a = 0; a <= bound; ++a)
                for (long k : {a, -a}) {
                    if (is_zero(cross(rows[static_cast<size_t>(bound + k)], lines[j].coeffs())))
                        return OrbitCoincidence{i, j, k};
                    if (a == 0) break;
                }
        }
    }
    return std::nullopt;
}

std::vector<OrbitHit> triple_orbit_search(const ProjectiveMap& beta, const std::array<ProjectiveLine, 3>& lines,
                                          long N, const SearchOptions& opt) {
    if (N < 0) throw PreconditionError("bad-range", "range must be non-negative");
    if (opt.check_orbit_distinctness)
        if (auto hit = find_orbit_coincidence(beta, lines, 2 * N)) throw OrbitDistinctnessError(hit->i, hit->j, hit->shift);
    const Vec3 L1 = primitive(lines[0].coeffs());
    auto R2 = orbit_rows(lines[1].coeffs(), beta.matrix(), N);
    auto R3 = orbit_rows(lines[2].coeffs(), beta.matrix(), N);
    const long W = 2 * N + 1;
    std::vector<std::vector<OrbitHit>> per_m(static_cast<size_t>(W));
    detail::parallel_for(static_cast<int>(W), opt.threads, [&](int im) {
        const Vec3& r2 = R2[static_cast<size_t>(im)];
        Vec3 c12 = cross(L1, r2);
        for (long in = 0; in < W; ++in) {
            const Vec3& r3 = R3[static_cast<size_t>(in)];
            if (dot(r3, c12) != 0) continue;
            Vec3 P = is_zero(c12) ? cross(L1, r3) : c12;
            if (is_zero(P)) continue;  // all three lines coincide: no isolated point
            P = primitive(P);
            if (dot(L1, P) != 0 || dot(r2, P) != 0 || dot(r3, P) != 0)
                throw ConvergenceError("internal: concurrency point fails an incidence check");
            bool same = is_zero(c12) || is_zero(cross(r2, r3)) || is_zero(cross(L1, r3));
            per_m[static_cast<size_t>(im)].push_back({im - N, in - N, P, same});
        }
    });
    std::vector<OrbitHit> out;
    for (auto& v : per_m) out.insert(out.end(), v.begin(), v.end());
    return out;
}

FamilyReport family_detect(const std::vector<OrbitHit>& all_hits, const ProjectiveMap& beta,
                           const std::array<ProjectiveLine, 3>&) {
    constexpr size_t kMinSupport = 5;
    // Coincident lines meet everywhere along them; such hits carry no pattern.
    std::vector<OrbitHit> hits;
    for (const auto& h : all_hits)
        if (!h.coincident) hits.push_back(h);
    const int n_coincident = static_cast<int>(all_hits.size() - hits.size());
    FamilyReport best;
    size_t best_support = 0;

    // Lines u m + v n = w through two hits.
    const size_t H = std::min<size_t>(hits.size(), 400);
    for (size_t i = 0; i < H; ++i)
        for (size_t j = i + 1; j < H; ++j) {
            long dm = hits[j].m - hits[i].m, dn = hits[j].n - hits[i].n;
            long g = std::gcd(dm, dn);
            if (g == 0) continue;
            long u = dn / g, v = -dm / g;
            if (u < 0 || (u == 0 && v < 0)) {
                u = -u;
                v = -v;
            }
            long w = u * hits[i].m + v * hits[i].n;
            std::vector<std::pair<long, long>> sup;
            for (const auto& h : hits)
                if (u * h.m + v * h.n == w) sup.push_back({h.m, h.n});
            if (sup.size() > best_support) {
                best_support = sup.size();
                best = FamilyReport{};
                best.kind = FamilyReport::Kind::LineFamily;
                best.u = u;
                best.v = v;
                best.w = w;
                best.support = sup;
            }
        }

    // m = A lambda^n + B n + C with lambda a ratio of rational eigenvalues.
    Classification cls = classify(beta);
    std::vector<Rational> bases;
    for (const auto& a : cls.eigenvalues)
        for (const auto& b : cls.eigenvalues)
            if (a.value && b.value && *a.value != *b.value) {
                Rational r = *a.value / *b.value;
                if (r != 1 && r != -1 && std::find(bases.begin(), bases.end(), r) == bases.end()) bases.push_back(r);
            }
    std::vector<const OrbitHit*> distinct_n;
    for (const auto& h : hits) {
        bool seen = false;
        for (auto* d : distinct_n) seen = seen || d->n == h.n;
        if (!seen && distinct_n.size() < 15) distinct_n.push_back(&h);
    }
    auto lam_pow = [](const Rational& l, long n) {
        Rational r = 1;
        Rational b = n >= 0 ? l : Rational(1 / l);
        for (long i = 0; i < std::labs(n); ++i) r *= b;
        return r;
    };
    for (const auto& lam : bases)
        for (size_t i = 0; i < distinct_n.size(); ++i)
            for (size_t j = i + 1; j < distinct_n.size(); ++j)
                for (size_t k = j + 1; k < distinct_n.size(); ++k) {
                    std::vector<std::vector<Rational>> M;
                    for (auto* h : {distinct_n[i], distinct_n[j], distinct_n[k]})
                        M.push_back({lam_pow(lam, h->n), Rational(h->n), Rational(1), Rational(h->m)});
                    std::vector<std::vector<Rational>> R;
                    std::vector<int> piv;
                    rank_of(M, &R, &piv);
                    if (piv.size() != 3 || piv[2] != 2) continue;
                    Rational A = R[0][3], B = R[1][3], C = R[2][3];
                    if (A == 0) continue;
                    std::vector<std::pair<long, long>> sup;
                    for (const auto& h : hits)
                        if (A * lam_pow(lam, h.n) + B * h.n + C == h.m) sup.push_back({h.m, h.n});
                    if (sup.size() > best_support) {
                        best_support = sup.size();
                        best = FamilyReport{};
                        best.kind = FamilyReport::Kind::ExponentialFamily;
                        best.A = A;
                        best.lambda = lam;
                        best.B = B;
                        best.C = C;
                        best.support = sup;
                    }
                }

    if (best_support < kMinSupport) {
        FamilyReport fin;
        fin.kind = cls.group == GroupClass::Undetermined && !hits.empty() ? FamilyReport::Kind::Undetermined
                                                                          : FamilyReport::Kind::FiniteSet;
        for (const auto& h : hits) fin.support.push_back({h.m, h.n});
        fin.coincident = n_coincident;
        return fin;
    }
    best.unexplained = static_cast<int>(hits.size() - best.support.size());
    best.coincident = n_coincident;
    return best;
}

FixedPointReport fixed_point_check(const ProjectiveMap& beta, const ProjectiveLine& L) {
    Classification cls = classify(beta);
    if (cls.group == GroupClass::Undetermined)
        throw PreconditionError("undetermined-spectrum", "fixed points need an exactly known spectrum");
    FixedPointReport rep;
    const Vec3& l = L.coeffs();
    for (const auto& ev : cls.eigenvalues) {
        if (!ev.value) continue;  // quadratic eigenvectors are not rational points
        auto basis = null_space(shifted(beta.matrix(), *ev.value));
        if (basis.size() == 1) {
            if (dot(l, basis[0]) == 0) rep.points.push_back(primitive(basis[0]));
        } else if (basis.size() == 2) {
            Vec3 fixed_line = cross(basis[0], basis[1]);
            if (is_zero(cross(fixed_line, l))) {
                rep.line_pointwise_fixed = true;
                for (const auto& b : basis) rep.points.push_back(primitive(b));
            } else {
                rep.points.push_back(primitive(cross(fixed_line, l)));
            }
        } else if (basis.size() == 3) {
            rep.line_pointwise_fixed = true;
        }
    }
    return rep;
}

RecurrenceReport recurrence_zeros(const ProjectiveMap& T, long N) {
    if (N < 0) throw PreconditionError("bad-range", "N must be non-negative");
    const Mat3& m = T.matrix();
    RecurrenceReport rep;
    rep.a = m[0][0] + m[1][1] + m[2][2];
    rep.b = -(m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0] + m[1][1] * m[2][2] -
              m[1][2] * m[2][1]);
    rep.c = determinant(m);
    Mat3 P = identity();
    for (long k = 0; k <= std::min(N, 2L); ++k) {
        rep.values.push_back(P[2][0]);
        P = multiply(P, m);
    }
    for (long k = 3; k <= N; ++k) {
        const auto& u = rep.values;
        size_t s = u.size();
        rep.values.push_back(rep.a * u[s - 1] + rep.b * u[s - 2] + rep.c * u[s - 3]);
    }
    for (long k = 0; k <= N; ++k)
        if (rep.values[static_cast<size_t>(k)] == 0) rep.zeros.push_back(k);

    auto is_zero_at = [&](long k) { return rep.values[static_cast<size_t>(k)] == 0; };
    for (long d = 1; d <= 12; ++d)
        for (long r = 0; r < d && r <= N; ++r) {
            long last = r + ((N - r) / d) * d;
            long first = last + d;
            for (long k = last; k >= r && is_zero_at(k); k -= d) first = k;
            if (first > last || (last - first) / d + 1 < 4) continue;
            bool subsumed = false;
            for (const auto& pr : rep.progressions)
                if (d % pr.modulus == 0 && (r - pr.residue) % pr.modulus == 0 && pr.first <= first) subsumed = true;
            if (!subsumed) rep.progressions.push_back({d, r, first});
        }
    for (long z : rep.zeros) {
        bool covered = false;
        for (const auto& pr : rep.progressions)
            if (z >= pr.first && (z - pr.residue) % pr.modulus == 0) covered = true;
        if (!covered) rep.sporadic.push_back(z);
    }
    return rep;
}

namespace {

Rational json_rational(const nlohmann::json& v) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(Integer(v.dump()));
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (!std::isfinite(d)) throw PreconditionError("bad-rational", "non-finite matrix entry");
        return parse_rational(v.dump());
    }
    throw PreconditionError("bad-rational", "entries must be integers, decimals or \"p/q\" strings");
}

Vec3 json_vec3(const nlohmann::json& v) {
    if (!v.is_array() || v.size() != 3) throw PreconditionError("bad-input", "expected an array of 3 entries");
    return {json_rational(v[0]), json_rational(v[1]), json_rational(v[2])};
}

nlohmann::json vec_json(const Vec3& v) { return {to_string(v[0]), to_string(v[1]), to_string(v[2])}; }

}  // namespace

Problem parse_problem(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("matrix")) throw PreconditionError("bad-input", "missing \"matrix\"");
    const auto& mj = j.at("matrix");
    if (!mj.is_array() || mj.size() != 3) throw PreconditionError("bad-input", "matrix must have 3 rows");
    Mat3 m{json_vec3(mj[0]), json_vec3(mj[1]), json_vec3(mj[2])};
    std::array<Vec3, 3> ls{Vec3{Rational(1), Rational(0), Rational(0)}, Vec3{Rational(0), Rational(1), Rational(0)},
                           Vec3{Rational(0), Rational(0), Rational(1)}};
    if (j.contains("lines")) {
        const auto& lj = j.at("lines");
        if (!lj.is_array() || lj.size() != 3) throw PreconditionError("bad-input", "lines must hold 3 triples");
        for (size_t i = 0; i < 3; ++i) ls[i] = json_vec3(lj[i]);
    }
    long range = j.value("range", 0L);
    bool check = j.value("check_orbits", true);
    return Problem{ProjectiveMap(m), {ProjectiveLine(ls[0]), ProjectiveLine(ls[1]), ProjectiveLine(ls[2])}, range,
                   check};
}

nlohmann::json to_json(const Classification& c) {
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& e : c.eigenvalues)
        ev.push_back({{"exact", e.exact}, {"re", e.re}, {"im", e.im}, {"algebraic", e.algebraic}, {"geometric", e.geometric}});
    return {{"group", to_string(c.group)}, {"torus_rank", c.torus_rank}, {"unipotent", c.unipotent},
            {"rigorous", c.rigorous},      {"witness", c.witness},       {"eigenvalues", ev}};
}

nlohmann::json to_json(const OrbitHit& h) {
    return {{"m", h.m}, {"n", h.n}, {"P", vec_json(h.P)}, {"coincident", h.coincident}};
}

nlohmann::json to_json(const FamilyReport& f) {
    nlohmann::json j{{"kind", to_string(f.kind)}, {"unexplained", f.unexplained}, {"coincident", f.coincident}};
    nlohmann::json sup = nlohmann::json::array();
    for (const auto& [m, n] : f.support) sup.push_back({m, n});
    j["support"] = sup;
    if (f.kind == FamilyReport::Kind::LineFamily) {
        j["u"] = f.u.str();
        j["v"] = f.v.str();
        j["w"] = f.w.str();
    }
    if (f.kind == FamilyReport::Kind::ExponentialFamily) {
        j["A"] = to_string(f.A);
        j["lambda"] = to_string(f.lambda);
        j["B"] = to_string(f.B);
        j["C"] = to_string(f.C);
    }
    return j;
}

nlohmann::json to_json(const RecurrenceReport& r) {
    nlohmann::json prog = nlohmann::json::array();
    for (const auto& p : r.progressions) prog.push_back({{"modulus", p.modulus}, {"residue", p.residue}, {"first", p.first}});
    return {{"recurrence", {to_string(r.a), to_string(r.b), to_string(r.c)}},
            {"zeros", r.zeros},
            {"progressions", prog},
            {"sporadic", r.sporadic}};
}

}  // namespace caustica::dml
