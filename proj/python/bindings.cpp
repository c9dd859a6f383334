#include <numbers>

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "caustica/birkhoff.hpp"
#include "caustica/dml.hpp"
#include "caustica/io.hpp"
#include "caustica/legendre.hpp"
#include "caustica/orbits.hpp"
#include "caustica/periods.hpp"

namespace py = pybind11;
using namespace caustica;

namespace {

using Pair = std::pair<double, double>;

Vec2 vec(const Pair& p) { return {p.first, p.second}; }
Pair tup(const Vec2& v) { return {v.x, v.y}; }

py::dict trajectory_dict(const Ellipse& e, const Trajectory& t) {
    py::list pts, dirs, s;
    for (const auto& x : t.states) {
        pts.append(tup(x.p));
        dirs.append(tup(x.v));
        s.append(caustic_value(e.c2(), x.p, x.v));
    }
    py::dict d;
    d["points"] = pts;
    d["directions"] = dirs;
    d["s"] = s;
    d["caustic"] = t.caustic.s;
    d["kind"] = to_string(t.caustic.kind);
    return d;
}

// Structured results cross the boundary as JSON text; the package decodes them.
std::string dml_problem_json(const std::string& text, bool search) {
    auto prob = dml::parse_problem(nlohmann::json::parse(text));
    nlohmann::json out{{"classification", dml::to_json(dml::classify(prob.beta))}};
    if (search) {
        dml::SearchOptions opt;
        opt.check_orbit_distinctness = prob.check_orbits;
        auto hits = dml::triple_orbit_search(prob.beta, prob.lines, prob.range, opt);
        nlohmann::json hj = nlohmann::json::array();
        for (const auto& h : hits) hj.push_back(dml::to_json(h));
        out["hits"] = hj;
        out["family"] = dml::to_json(dml::family_detect(hits, prob.beta, prob.lines));
    }
    return out.dump();
}

}  // namespace

PYBIND11_MODULE(_caustica, m) {
    m.doc() = "Elliptic billiards, Betti coordinates and projective orbit intersections";

    auto base = py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
    (void)base;

    m.def("caustic_of_direction", [](double c, Pair p, Pair v) {
        auto s = caustic_of_direction(Ellipse(c), vec(p), vec(v));
        return std::make_pair(s.s, to_string(s.kind));
    }, py::arg("c"), py::arg("p"), py::arg("v"));

    m.def("simulate", [](double c, Pair p, Pair v, int bounces) {
        Ellipse e(c);
        return trajectory_dict(e, simulate(e, {vec(p), vec(v)}, bounces));
    }, py::arg("c"), py::arg("p"), py::arg("v"), py::arg("bounces"));

    m.def("caustic_extrema", [](double c, Pair p) {
        auto x = caustic_extrema(Ellipse(c), vec(p));
        return std::make_pair(x.M, x.m);
    }, py::arg("c"), py::arg("p"));

    m.def("counting_constants", [](double c, Pair p) {
        auto k = counting_constants(Ellipse(c), vec(p));
        py::dict d;
        d["odd"] = k.odd;
        d["even"] = k.even;
        d["closed_form"] = k.closed_form;
        return d;
    }, py::arg("c"), py::arg("p"));

    m.def("periodic_directions", [](double c, Pair p, int n) {
        std::vector<double> angles;
        for (const auto& d : find_periodic_directions(Ellipse(c), vec(p), n)) angles.push_back(d.angle);
        return angles;
    }, py::arg("c"), py::arg("p"), py::arg("n"), "Angles of the directions from p closing after n bounces.");

    m.def("betti_count", [](double c, Pair p, int n) { return PeriodicSearch(Ellipse(c), vec(p)).betti_count(n); },
          py::arg("c"), py::arg("p"), py::arg("n"));

    m.def("omega2", &omega2, py::arg("lam"));
    m.def("omega1", &omega1, py::arg("lam"));
    m.def("agm", &agm, py::arg("a"), py::arg("b"));
    m.def("betti", [](double c, double lam) {
        auto b = betti_billiard(Ellipse(c), lam);
        return std::make_pair(b.beta1, b.beta2);
    }, py::arg("c"), py::arg("lam"));
    m.def("lambda_for_beta2", [](double c, double target, bool elliptic) {
        return lambda_for_beta2(Ellipse(c), target, elliptic);
    }, py::arg("c"), py::arg("target"), py::arg("elliptic") = true);
    m.def("rotation_number", [](double c, double s, long iters) {
        Ellipse e(c);
        return rotation_number(e, classify_caustic(e, s), iters);
    }, py::arg("c"), py::arg("s"), py::arg("iterations") = 100000);
    m.def("picard_fuchs_residual", [](double lam) { return picard_fuchs_residual(lam); }, py::arg("lam"));

    m.def("billiard_section", [](double c, double lam) {
        auto b = billiard_section(Ellipse(c), lam);
        return std::make_pair(b.x, b.y);
    }, py::arg("c"), py::arg("lam"));

    m.def("connect", [](double c, Pair p1, Pair p2, int n, std::uint64_t seed) {
        Ellipse e(c);
        ConnectOptions opt;
        opt.seed = seed;
        auto t = connecting_trajectory(e, vec(p1), vec(p2), n, opt);
        auto pts = connecting_vertices(e, vec(p1), vec(p2), t);
        std::vector<Pair> out;
        for (const auto& q : pts) out.push_back(tup(q));
        py::dict d;
        d["vertices"] = out;
        d["length"] = path_length(pts);
        d["reflection_residual"] = reflection_residual(e, pts);
        d["caustic"] = t.caustic.s;
        return d;
    }, py::arg("c"), py::arg("p1"), py::arg("p2"), py::arg("n"), py::arg("seed") = 1);

    m.def("birkhoff_spread", [](double c, double s, int n, int starts) {
        Ellipse e(c);
        auto cs = classify_caustic(e, s);
        double lo = INFINITY, hi = -INFINITY;
        for (int i = 0; i < starts; ++i) {
            auto st = caustic_start(e, cs, 2 * std::numbers::pi * (i + 0.5) / starts);
            if (st.empty()) continue;
            double v = birkhoff_sum(e, st[0], n);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return hi - lo;
    }, py::arg("c"), py::arg("s"), py::arg("n"), py::arg("starts") = 20,
       "Spread of n-bounce cosine sums over evenly spaced starts on caustic s.");

    m.def("moebius_fit", [](double c, double s, int n, int samples) {
        Ellipse e(c);
        auto f = moebius_fit(e, classify_caustic(e, s), n, samples);
        py::dict d;
        d["a"] = f.a;
        d["b"] = f.b;
        d["c"] = f.c;
        d["d"] = f.d;
        d["residual"] = f.residual;
        return d;
    }, py::arg("c"), py::arg("s"), py::arg("n"), py::arg("samples") = 40);

    m.def("boomerang_scan", [](double c, Pair p, int n_max, double tol, int threads) {
        ScanOptions opt;
        opt.threads = threads;
        std::vector<std::tuple<double, int, int>> out;
        for (const auto& b : boomerang_scan(Ellipse(c), vec(p), n_max, tol, opt))
            out.emplace_back(b.angle, b.bounce, static_cast<int>(b.type));
        return out;
    }, py::arg("c"), py::arg("p"), py::arg("n_max"), py::arg("tol") = 1e-9, py::arg("threads") = 1,
       "(angle, bounce, type) triples; type 1 periodic, 2 reversed, 3 other tangent.");

    m.def("_dml_classify", [](const std::string& text) { return dml_problem_json(text, false); });
    m.def("_dml_search", [](const std::string& text) { return dml_problem_json(text, true); });
}
