#pragma once

// Output formats shared by the command-line tool and the Python module.

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "caustica/birkhoff.hpp"
#include "caustica/conics.hpp"
#include "caustica/orbits.hpp"
#include "json.hpp"

namespace caustica::io {

// 17 significant digits, enough to round-trip any double.
std::string fmt(double x);

struct RunMeta {
    std::string command;
    std::uint64_t seed = 1;
    std::vector<std::pair<std::string, std::string>> params;  // in flag order
};

// "# caustica <command> seed=<seed> key=value ..." (one line).
void write_meta_comment(std::ostream& os, const RunMeta& meta);
nlohmann::json meta_json(const RunMeta& meta);

void write_csv(std::ostream& os, const RunMeta& meta, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

// Columns step,x,y,vx,vy,s with s recomputed per segment.
void write_trajectory_csv(std::ostream& os, const RunMeta& meta, const Ellipse& e, const Trajectory& t);

nlohmann::json to_json(const PeriodicDirection& d);
nlohmann::json to_json(const BoomerangShot& b);
nlohmann::json to_json(const HoleScanResult& r);
nlohmann::json to_json(const AnglePair& p);
nlohmann::json to_json(const LatticePairResult& r);
nlohmann::json to_json(const MoebiusFit& f);

// Table, caustic and trajectory polyline in the square viewBox
// -1.15 -1.15 2.3 2.3 (y up).
std::string render_svg(const Ellipse& e, const CausticParam& caustic, const std::vector<Vec2>& path);

}  // namespace caustica::io
