#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <set>

#include "CLI11.hpp"
#include "caustica/birkhoff.hpp"
#include "caustica/conics.hpp"
#include "caustica/dml.hpp"
#include "caustica/io.hpp"
#include "caustica/orbits.hpp"
#include "caustica/periods.hpp"
#include "json.hpp"

using namespace caustica;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Globals {
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out;
};

// Output sink: --out path, or stdout.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw PreconditionError("bad-output", "cannot open " + path);
        }
    }
    std::ostream& os() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

io::RunMeta meta_of(const CLI::App* sub, const std::string& name, const Globals& g) {
    io::RunMeta m{name, g.seed, {}};
    for (const CLI::Option* o : sub->get_options()) {
        std::string key = o->get_single_name();
        if (key == "help" || key == "h") continue;
        std::string val;
        if (o->count() > 0) {
            for (const auto& r : o->results()) val += (val.empty() ? "" : ";") + r;
        } else {
            val = o->get_default_str();
        }
        if (!val.empty() && val != "nan") m.params.push_back({key, val});  // NaN marks an unset flag
    }
    return m;
}

void emit_json(const Globals& g, const io::RunMeta& meta, json result) {
    Sink sink(g.out);
    json doc{{"meta", io::meta_json(meta)}, {"result", std::move(result)}};
    sink.os() << doc.dump(2) << '\n';
}

Vec2 direction_from(double slope, double angle) {
    if (!std::isnan(angle)) return {std::cos(angle), std::sin(angle)};
    if (std::isinf(slope)) return {0.0, 1.0};
    return Vec2{1.0, slope}.unit();
}

// Appends "--key value" for every config entry whose flag is absent from argv.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
    std::string path;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw PreconditionError("bad-config", "cannot read config " + path);
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::exception& ex) {
        throw PreconditionError("bad-config", std::string("config is not valid JSON: ") + ex.what());
    }
    if (!cfg.is_object()) throw PreconditionError("bad-config", "config must be a JSON object");
    std::set<std::string> given;
    for (const auto& a : args)
        if (a.rfind("--", 0) == 0) given.insert(a.substr(0, a.find('=')));
    std::vector<std::string> out = args;
    for (const auto& [key, val] : cfg.items()) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        if (flag == "--config" || given.count(flag)) continue;
        auto text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
        if (val.is_boolean()) {
            if (val.get<bool>()) out.push_back(flag);
        } else if (val.is_array()) {
            out.push_back(flag);
            for (const auto& x : val) out.push_back(text(x));
        } else {
            out.push_back(flag);
            out.push_back(text(val));
        }
    }
    return out;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PreconditionError("bad-input", "cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& ex) {
        throw PreconditionError("bad-input", std::string("input is not valid JSON: ") + ex.what());
    }
}

json point_json(const dml::Vec3& p) { return {dml::to_string(p[0]), dml::to_string(p[1]), dml::to_string(p[2])}; }

int fail(const std::string& code, const std::string& msg, int status) {
    std::cerr << json{{"error", code}, {"message", msg}}.dump() << '\n';
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Elliptic billiards, caustics and projective orbit search"};
    app.require_subcommand(1);
    app.fallthrough();
    app.option_defaults()->always_capture_default();
    Globals g;
    std::string config_path;
    app.add_option("--seed", g.seed, "seed for multistart randomization");
    app.add_option("--threads", g.threads, "worker threads for scans")->envname("CAUSTICA_THREADS")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "output path (default stdout)");
    app.add_option("--config", config_path, "JSON file mirroring the flags");

    std::vector<std::pair<CLI::App*, std::function<void()>>> commands;
    auto command = [&](CLI::App* parent, const std::string& name, const std::string& help) {
        CLI::App* sub = parent->add_subcommand(name, help);
        sub->fallthrough();
        return sub;
    };

    // simulate / render share the shot flags.
    struct ShotFlags {
        double c = 0.6, x = 0, y = 0, slope = 1, angle = NAN;
        int bounces = 100;
    };
    auto add_shot = [](CLI::App* sub, ShotFlags& f) {
        sub->add_option("--c", f.c, "focal half-distance, 0 < c < 1")->required();
        sub->add_option("--x", f.x);
        sub->add_option("--y", f.y);
        sub->add_option("--slope", f.slope);
        sub->add_option("--angle", f.angle, "direction angle; overrides --slope");
        sub->add_option("--bounces", f.bounces);
    };

    ShotFlags sim;
    CLI::App* sim_cmd = command(&app, "simulate", "billiard trajectory as CSV");
    add_shot(sim_cmd, sim);
    commands.push_back({sim_cmd, [&] {
                            Ellipse e(sim.c);
                            Trajectory t = simulate(e, {{sim.x, sim.y}, direction_from(sim.slope, sim.angle)}, sim.bounces);
                            Sink sink(g.out);
                            io::write_trajectory_csv(sink.os(), meta_of(sim_cmd, "simulate", g), e, t);
                        }});

    struct {
        double c = 0.6, lo = NAN, hi = NAN;
        int samples = 200;
    } bs;
    CLI::App* bs_cmd = command(&app, "betti-scan", "Betti coordinates over lambda");
    bs_cmd->add_option("--c", bs.c)->required();
    bs_cmd->add_option("--lambda-min", bs.lo);
    bs_cmd->add_option("--lambda-max", bs.hi);
    bs_cmd->add_option("--samples", bs.samples)->check(CLI::PositiveNumber);
    commands.push_back({bs_cmd, [&] {
                            Ellipse e(bs.c);
                            double lo = std::isnan(bs.lo) ? 0.0 : bs.lo, hi = std::isnan(bs.hi) ? 1.0 / e.c2() : bs.hi;
                            std::vector<std::vector<double>> rows;
                            for (int j = 0; j < bs.samples; ++j) {
                                double lam = lo + (hi - lo) * (j + 0.5) / bs.samples;
                                if (std::abs(lam - 1.0) < 1e-12) continue;
                                BettiCoords b = betti_billiard(e, lam);
                                rows.push_back({lam, b.beta1, b.beta2});
                            }
                            Sink sink(g.out);
                            io::write_csv(sink.os(), meta_of(bs_cmd, "betti-scan", g), {"lambda", "beta1", "beta2"}, rows);
                        }});

    struct {
        double c = 0.6, px = 0.2, py = 0.3, tol = 1e-6;
        int nmin = 2, nmax = 301, n = 7;
    } pf;
    CLI::App* cp_cmd = command(&app, "count-periodic", "number of n-periodic directions for each n");
    cp_cmd->add_option("--c", pf.c)->required();
    cp_cmd->add_option("--px", pf.px);
    cp_cmd->add_option("--py", pf.py);
    cp_cmd->add_option("--nmin", pf.nmin);
    cp_cmd->add_option("--nmax", pf.nmax);
    cp_cmd->add_option("--tol", pf.tol);
    commands.push_back({cp_cmd, [&] {
                            Ellipse e(pf.c);
                            PeriodicSearch search(e, {pf.px, pf.py});
                            std::vector<std::vector<double>> rows;
                            for (int n = std::max(1, pf.nmin); n <= pf.nmax; ++n) {
                                auto dirs = search.directions(n, pf.tol);
                                rows.push_back({double(n), double(n % 2), double(dirs.size()),
                                                predicted_count(e, {pf.px, pf.py}, n)});
                            }
                            Sink sink(g.out);
                            io::write_csv(sink.os(), meta_of(cp_cmd, "count-periodic", g),
                                          {"n", "parity", "count", "predicted"}, rows);
                        }});

    CLI::App* fp_cmd = command(&app, "find-periodic", "certified n-periodic directions from a point");
    fp_cmd->add_option("--c", pf.c)->required();
    fp_cmd->add_option("--px", pf.px);
    fp_cmd->add_option("--py", pf.py);
    fp_cmd->add_option("--n", pf.n);
    fp_cmd->add_option("--tol", pf.tol);
    commands.push_back({fp_cmd, [&] {
                            Ellipse e(pf.c);
                            json arr = json::array();
                            for (const auto& d : find_periodic_directions(e, {pf.px, pf.py}, pf.n, pf.tol))
                                arr.push_back(io::to_json(d));
                            emit_json(g, meta_of(fp_cmd, "find-periodic", g), {{"directions", arr}});
                        }});

    struct {
        double c = 0.6, x1 = 0.1, y1 = 0.2, x2 = -0.3, y2 = 0.1;
        int n = 12, starts = 8;
    } cn;
    CLI::App* cn_cmd = command(&app, "connect", "longest n-bounce trajectory between two points");
    cn_cmd->add_option("--c", cn.c)->required();
    cn_cmd->add_option("--x1", cn.x1);
    cn_cmd->add_option("--y1", cn.y1);
    cn_cmd->add_option("--x2", cn.x2);
    cn_cmd->add_option("--y2", cn.y2);
    cn_cmd->add_option("--n", cn.n);
    cn_cmd->add_option("--starts", cn.starts)->check(CLI::PositiveNumber);
    commands.push_back({cn_cmd, [&] {
                            Ellipse e(cn.c);
                            ConnectOptions opt;
                            opt.starts = cn.starts;
                            opt.seed = g.seed;
                            Vec2 p1{cn.x1, cn.y1}, p2{cn.x2, cn.y2};
                            Trajectory t = connecting_trajectory(e, p1, p2, cn.n, opt);
                            auto pts = connecting_vertices(e, p1, p2, t);
                            json verts = json::array();
                            double smin = INFINITY, smax = -INFINITY;
                            for (size_t i = 0; i < pts.size(); ++i) {
                                verts.push_back({pts[i].x, pts[i].y});
                                if (i + 1 < pts.size()) {
                                    double s = caustic_value(e.c2(), pts[i], (pts[i + 1] - pts[i]).unit());
                                    smin = std::min(smin, s);
                                    smax = std::max(smax, s);
                                }
                            }
                            emit_json(g, meta_of(cn_cmd, "connect", g),
                                      {{"vertices", verts},
                                       {"length", path_length(pts)},
                                       {"reflection_residual", reflection_residual(e, pts)},
                                       {"s", t.caustic.s},
                                       {"caustic", to_string(t.caustic.kind)},
                                       {"s_spread", smax - smin}});
                        }});

    struct {
        double c = 0.6;
        int k = 1, n = 7, starts = 20;
        std::string side = "elliptic";
    } pc;
    CLI::App* pc_cmd = command(&app, "poncelet", "closure after n bounces on the caustic with rotation k/n");
    pc_cmd->add_option("--c", pc.c)->required();
    pc_cmd->add_option("--k", pc.k);
    pc_cmd->add_option("--n", pc.n)->check(CLI::PositiveNumber);
    pc_cmd->add_option("--side", pc.side)->check(CLI::IsMember({"elliptic", "hyperbolic"}));
    pc_cmd->add_option("--starts", pc.starts)->check(CLI::PositiveNumber);
    commands.push_back({pc_cmd, [&] {
                            Ellipse e(pc.c);
                            bool elliptic = pc.side == "elliptic";
                            double lam = lambda_for_beta2(e, double(pc.k) / pc.n, elliptic);
                            CausticParam cp = classify_caustic(e, lam * e.c2());
                            std::mt19937_64 rng(g.seed);
                            std::uniform_real_distribution<double> U(0.0, 2 * kPi);
                            json starts = json::array();
                            double worst = 0;
                            for (int i = 0, tries = 0; i < pc.starts && tries < 1000 * pc.starts; ++tries) {
                                double t = U(rng);
                                auto st = caustic_start(e, cp, t);
                                if (st.empty()) continue;
                                double err = closure_error(e, {st[0].p, st[0].v}, pc.n);
                                worst = std::max(worst, err);
                                starts.push_back({{"t", t}, {"x", st[0].p.x}, {"y", st[0].p.y}, {"closure", err}});
                                ++i;
                            }
                            emit_json(g, meta_of(pc_cmd, "poncelet", g),
                                      {{"lambda", lam},
                                       {"s", cp.s},
                                       {"beta2", betti_billiard(e, lam).beta2},
                                       {"starts", starts},
                                       {"max_closure", worst}});
                        }});

    struct {
        double c = 0.6, s = 0.8;
        int n = 7, samples = 100;
    } bk;
    CLI::App* bk_cmd = command(&app, "birkhoff", "symmetric window sums of bounce cosines along the boundary");
    CLI::App* mf_cmd = command(&app, "moebius-fit", "Moebius fit of window sums in x^2");
    for (CLI::App* sub : {bk_cmd, mf_cmd}) {
        sub->add_option("--c", bk.c)->required();
        sub->add_option("--s", bk.s, "caustic parameter");
        sub->add_option("--n", bk.n, "odd window length");
        sub->add_option("--samples", bk.samples)->check(CLI::PositiveNumber);
    }
    commands.push_back({bk_cmd, [&] {
                            Ellipse e(bk.c);
                            CausticParam cp = classify_caustic(e, bk.s);
                            std::vector<std::vector<double>> rows;
                            for (const auto& p : symmetric_profile(e, cp, bk.n, bk.samples)) rows.push_back({p.x, p.y, p.sum});
                            Sink sink(g.out);
                            io::write_csv(sink.os(), meta_of(bk_cmd, "birkhoff", g), {"x", "y", "sum"}, rows);
                        }});
    commands.push_back({mf_cmd, [&] {
                            Ellipse e(bk.c);
                            CausticParam cp = classify_caustic(e, bk.s);
                            MoebiusFit fit = moebius_fit(e, cp, bk.n, bk.samples);
                            ProfileExtrema ex = profile_extrema(e, cp, bk.n);
                            emit_json(g, meta_of(mf_cmd, "moebius-fit", g),
                                      {{"fit", io::to_json(fit)},
                                       {"periodicity_gap", periodicity_gap(e, cp, bk.n)},
                                       {"extrema",
                                        {{"max", ex.max}, {"x_at_max", ex.x_at_max}, {"min", ex.min}, {"x_at_min", ex.x_at_min}}}});
                        }});

    struct {
        double c = 0.6, px = 0.2, py = 0.3, x2 = 0, y2 = 0, hx = 1, hy = 0, tol = 1e-9, alpha = 1.0;
        int nmax = 10, cells = 4096;
    } sc;
    auto scan_opts = [&] {
        ScanOptions o;
        o.cells = sc.cells;
        o.threads = g.threads;
        return o;
    };
    CLI::App* sb_cmd = command(&app, "scan-boomerang", "shots returning through their starting point");
    sb_cmd->add_option("--c", sc.c)->required();
    sb_cmd->add_option("--px", sc.px);
    sb_cmd->add_option("--py", sc.py);
    sb_cmd->add_option("--nmax", sc.nmax);
    sb_cmd->add_option("--tol", sc.tol);
    sb_cmd->add_option("--cells", sc.cells)->check(CLI::PositiveNumber);
    commands.push_back({sb_cmd, [&] {
                            Ellipse e(sc.c);
                            json arr = json::array();
                            for (const auto& s : boomerang_scan(e, {sc.px, sc.py}, sc.nmax, sc.tol, scan_opts()))
                                arr.push_back(io::to_json(s));
                            emit_json(g, meta_of(sb_cmd, "scan-boomerang", g), {{"shots", arr}});
                        }});

    CLI::App* sh_cmd = command(&app, "scan-hole", "shots from p1 through p2 that end in the hole h");
    sh_cmd->add_option("--c", sc.c)->required();
    sh_cmd->add_option("--x1", sc.px);
    sh_cmd->add_option("--y1", sc.py);
    sh_cmd->add_option("--x2", sc.x2);
    sh_cmd->add_option("--y2", sc.y2);
    sh_cmd->add_option("--hx", sc.hx);
    sh_cmd->add_option("--hy", sc.hy);
    sh_cmd->add_option("--nmax", sc.nmax);
    sh_cmd->add_option("--tol", sc.tol);
    sh_cmd->add_option("--cells", sc.cells)->check(CLI::PositiveNumber);
    commands.push_back({sh_cmd, [&] {
                            Ellipse e(sc.c);
                            auto r = hole_scan(e, {sc.px, sc.py}, {sc.x2, sc.y2}, {sc.hx, sc.hy}, sc.nmax, sc.tol, scan_opts());
                            emit_json(g, meta_of(sh_cmd, "scan-hole", g), io::to_json(r));
                        }});

    CLI::App* sa_cmd = command(&app, "scan-angle-pair", "two periodic directions from p at a fixed angle");
    sa_cmd->add_option("--c", sc.c)->required();
    sa_cmd->add_option("--px", sc.px);
    sa_cmd->add_option("--py", sc.py);
    sa_cmd->add_option("--alpha", sc.alpha);
    sa_cmd->add_option("--nmax", sc.nmax);
    sa_cmd->add_option("--tol", sc.tol);
    commands.push_back({sa_cmd, [&] {
                            Ellipse e(sc.c);
                            json arr = json::array();
                            for (const auto& p : angle_pair_scan(e, {sc.px, sc.py}, sc.alpha, sc.nmax, sc.tol))
                                arr.push_back(io::to_json(p));
                            emit_json(g, meta_of(sa_cmd, "scan-angle-pair", g), {{"pairs", arr}});
                        }});

    struct {
        double tau_re = 0, tau_im = 1, alpha = kPi / 2;
        int H = 10;
    } lp;
    CLI::App* lp_cmd = command(&app, "lattice-pairs", "lattice vector pairs at a fixed angle");
    lp_cmd->add_option("--tau-re", lp.tau_re);
    lp_cmd->add_option("--tau-im", lp.tau_im);
    lp_cmd->add_option("--alpha", lp.alpha);
    lp_cmd->add_option("--H", lp.H, "coefficient height bound")->check(CLI::PositiveNumber);
    commands.push_back({lp_cmd, [&] {
                            auto r = parallelogram_angle_pairs({lp.tau_re, lp.tau_im}, lp.alpha, lp.H);
                            emit_json(g, meta_of(lp_cmd, "lattice-pairs", g), io::to_json(r));
                        }});

    CLI::App* dml_cmd = command(&app, "dml", "projective orbits meeting three lines (exact)");
    dml_cmd->require_subcommand(1);
    struct {
        std::string input;
        long range = -1;
        bool no_orbit_check = false;
    } dm;
    CLI::App* dc_cmd = command(dml_cmd, "classify", "closure group of the map");
    CLI::App* ds_cmd = command(dml_cmd, "search", "exact search for concurrent orbit triples");
    for (CLI::App* sub : {dc_cmd, ds_cmd}) sub->add_option("--input", dm.input, "problem JSON")->required();
    ds_cmd->add_option("--range", dm.range, "overrides the input range");
    ds_cmd->add_flag("--no-orbit-check", dm.no_orbit_check, "skip the orbit-distinctness precondition");
    commands.push_back({dc_cmd, [&] {
                            json in = read_json_file(dm.input);
                            if (!in.contains("lines")) in["lines"] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
                            dml::Problem pr = dml::parse_problem(in);
                            auto cls = dml::classify(pr.beta);
                            json out{{"classification", dml::to_json(cls)}};
                            if (cls.group != dml::GroupClass::Undetermined) {
                                json fixed = json::array();
                                for (const auto& L : pr.lines) {
                                    auto f = dml::fixed_point_check(pr.beta, L);
                                    json pts = json::array();
                                    for (const auto& p : f.points) pts.push_back(point_json(p));
                                    fixed.push_back({{"points", pts}, {"pointwise_fixed", f.line_pointwise_fixed}});
                                }
                                out["fixed_points_on_lines"] = fixed;
                            }
                            emit_json(g, meta_of(dc_cmd, "dml classify", g), out);
                        }});
    commands.push_back({ds_cmd, [&] {
                            dml::Problem pr = dml::parse_problem(read_json_file(dm.input));
                            long N = dm.range >= 0 ? dm.range : pr.range;
                            dml::SearchOptions opt;
                            opt.check_orbit_distinctness = pr.check_orbits && !dm.no_orbit_check;
                            opt.threads = g.threads;
                            auto hits = dml::triple_orbit_search(pr.beta, pr.lines, N, opt);
                            json arr = json::array();
                            for (const auto& h : hits) arr.push_back(dml::to_json(h));
                            emit_json(g, meta_of(ds_cmd, "dml search", g),
                                      {{"range", N},
                                       {"orbit_check", opt.check_orbit_distinctness},
                                       {"classification", dml::to_json(dml::classify(pr.beta))},
                                       {"hits", arr},
                                       {"family", dml::to_json(dml::family_detect(hits, pr.beta, pr.lines))}});
                        }});

    ShotFlags rd;
    rd.bounces = 20;
    CLI::App* rd_cmd = command(&app, "render", "SVG of table, caustic and trajectory");
    add_shot(rd_cmd, rd);
    commands.push_back({rd_cmd, [&] {
                            Ellipse e(rd.c);
                            Vec2 p{rd.x, rd.y};
                            Trajectory t = simulate(e, {p, direction_from(rd.slope, rd.angle)}, rd.bounces);
                            std::vector<Vec2> path{p};
                            for (const auto& s : t.states) path.push_back(s.p);
                            Sink sink(g.out);
                            io::RunMeta meta = meta_of(rd_cmd, "render", g);
                            sink.os() << "<!-- caustica render seed=" << meta.seed;
                            for (const auto& [k, v] : meta.params) sink.os() << ' ' << k << '=' << v;
                            sink.os() << " -->\n" << io::render_svg(e, t.caustic, path);
                        }});

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = merge_config(args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        return fail("usage", ex.what(), 2);
    } catch (const PreconditionError& ex) {
        return fail(ex.code(), ex.what(), 2);
    }

    try {
        for (auto& [sub, run] : commands)
            if (sub->parsed()) {
                run();
                return 0;
            }
        return fail("usage", "no subcommand", 2);
    } catch (const PreconditionError& ex) {
        return fail(ex.code(), ex.what(), 2);
    } catch (const ConvergenceError& ex) {
        return fail("convergence", ex.what(), 3);
    } catch (const std::exception& ex) {
        return fail("internal", ex.what(), 1);
    }
}
