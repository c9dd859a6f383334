#include "caustica/io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace caustica::io {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_meta_comment(std::ostream& os, const RunMeta& meta) {
    os << "# caustica " << meta.command << " seed=" << meta.seed;
    for (const auto& [k, v] : meta.params) os << ' ' << k << '=' << v;
    os << '\n';
}

nlohmann::json meta_json(const RunMeta& meta) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : meta.params) params[k] = v;
    return {{"command", meta.command}, {"seed", meta.seed}, {"params", params}};
}

void write_csv(std::ostream& os, const RunMeta& meta, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    write_meta_comment(os, meta);
    for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& r : rows) {
        for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt(r[i]);
        os << '\n';
    }
}

void write_trajectory_csv(std::ostream& os, const RunMeta& meta, const Ellipse& e, const Trajectory& t) {
    std::vector<std::vector<double>> rows;
    int step = 1;
    for (const auto& x : t.states) {
        double s = caustic_value(e.c2(), x.p, x.v);
        rows.push_back({double(step++), x.p.x, x.p.y, x.v.x, x.v.y, s});
    }
    write_csv(os, meta, {"step", "x", "y", "vx", "vy", "s"}, rows);
}

nlohmann::json to_json(const PeriodicDirection& d) {
    nlohmann::json j{{"angle", d.angle},
                     {"vx", d.direction.x},
                     {"vy", d.direction.y},
                     {"period", d.period},
                     {"s", d.caustic.s},
                     {"kind", to_string(d.caustic.kind)},
                     {"closure_error", d.closure_error},
                     {"precision_bits", d.precision_bits}};
    if (!d.angle_text.empty()) j["angle_text"] = d.angle_text;
    return j;
}

nlohmann::json to_json(const BoomerangShot& b) {
    return {{"angle", b.angle},   {"vx", b.direction.x},         {"vy", b.direction.y},
            {"bounce", b.bounce}, {"type", static_cast<int>(b.type)}, {"distance", b.distance}};
}

nlohmann::json to_json(const HoleScanResult& r) {
    nlohmann::json shots = nlohmann::json::array();
    for (const auto& s : r.shots)
        shots.push_back({{"angle", s.angle},
                         {"vx", s.direction.x},
                         {"vy", s.direction.y},
                         {"ball_segment", s.ball_segment},
                         {"hole_bounce", s.hole_bounce},
                         {"ball_distance", s.ball_distance},
                         {"hole_distance", s.hole_distance}});
    return {{"focal_exception", r.focal_exception}, {"shots", shots}};
}

nlohmann::json to_json(const AnglePair& p) {
    return {{"first", to_json(p.first)}, {"second", to_json(p.second)}, {"angle_mismatch", p.angle_mismatch}};
}

nlohmann::json to_json(const LatticePairResult& r) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : r.pairs)
        pairs.push_back({{"a1", p.a1}, {"b1", p.b1}, {"a2", p.a2}, {"b2", p.b2}, {"mismatch", p.mismatch}});
    return {{"pairs", pairs}, {"quadratic_tau", r.quadratic_tau}, {"quadratic", r.quadratic}};
}

nlohmann::json to_json(const MoebiusFit& f) {
    return {{"a", f.a},     {"b", f.b},       {"c", f.c},
            {"d", f.d},     {"det", f.det},   {"residual", f.residual},
            {"samples", f.samples}};
}

namespace {

std::string polyline(const std::vector<Vec2>& pts, const std::string& style) {
    std::ostringstream os;
    os << "<polyline fill=\"none\" " << style << " points=\"";
    for (size_t i = 0; i < pts.size(); ++i) os << (i ? " " : "") << fmt(pts[i].x) << ',' << fmt(pts[i].y);
    os << "\"/>\n";
    return os.str();
}

}  // namespace

std::string render_svg(const Ellipse& e, const CausticParam& caustic, const std::vector<Vec2>& path) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-1.15 -1.15 2.3 2.3\" width=\"600\" height=\"600\">\n";
    os << "<g transform=\"scale(1,-1)\" stroke-width=\"0.004\">\n";
    os << "<ellipse cx=\"0\" cy=\"0\" rx=\"1\" ry=\"" << fmt(e.b()) << "\" fill=\"none\" stroke=\"black\"/>\n";
    const std::string caustic_style = "stroke=\"#c03030\" stroke-dasharray=\"0.02,0.01\"";
    if (caustic.kind == CausticKind::Elliptic) {
        os << "<ellipse cx=\"0\" cy=\"0\" rx=\"" << fmt(std::sqrt(caustic.s)) << "\" ry=\""
           << fmt(std::sqrt(caustic.s - e.c2())) << "\" fill=\"none\" " << caustic_style << "/>\n";
    } else if (caustic.kind == CausticKind::Hyperbolic && caustic.s > 0) {
        // x = +-sqrt(s) cosh u, y = sqrt(c^2 - s) sinh u, clipped to the view.
        const double a = std::sqrt(caustic.s), b = std::sqrt(e.c2() - caustic.s);
        const double umax = std::asinh(1.15 / b);
        for (int side : {1, -1}) {
            std::vector<Vec2> pts;
            for (int k = -200; k <= 200; ++k) {
                double u = umax * k / 200.0;
                Vec2 q{side * a * std::cosh(u), b * std::sinh(u)};
                if (std::abs(q.x) <= 1.15) pts.push_back(q);
            }
            os << polyline(pts, caustic_style);
        }
    }
    if (!path.empty()) os << polyline(path, "stroke=\"#2050c0\"");
    os << "</g>\n</svg>\n";
    return os.str();
}

}  // namespace caustica::io
