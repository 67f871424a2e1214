#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stickslip/config.hpp"
#include "stickslip/integrator.hpp"
#include "stickslip/periodic.hpp"

namespace stickslip {

/// A malformed trajectory CSV.
class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Event markers per sample row: an onset marks the first row at its time
/// (the arrival at u = 0), a release marks the last row (the departure).
inline std::vector<const char*> event_markers(const Trajectory& traj) {
    std::vector<const char*> mark(traj.samples.size(), "");
    auto first_at = [&](double t) -> std::ptrdiff_t {
        auto it = std::lower_bound(traj.samples.begin(), traj.samples.end(), t,
                                   [](const State& s, double x) { return s.t < x; });
        if (it == traj.samples.end() || it->t != t) return -1;
        return it - traj.samples.begin();
    };
    for (const Event& ev : traj.events) {
        std::ptrdiff_t i = first_at(ev.t);
        if (i < 0) continue;
        if (ev.kind == EventKind::StickRelease) {
            while (i + 1 < static_cast<std::ptrdiff_t>(traj.samples.size()) &&
                   traj.samples[i + 1].t == ev.t)
                ++i;
            mark[i] = "stick_release";
        } else {
            mark[i] = "stick_onset";
        }
    }
    return mark;
}

} // namespace detail

/// Writes the sample rows as CSV with 17 significant digits, so a reload
/// reproduces every double bit-for-bit.  Columns: t,u_x,u_y,mode,event.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const std::vector<const char*> mark = detail::event_markers(traj);
    os << "t,u_x,u_y,mode,event\n";
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const State& s = traj.samples[i];
        os << detail::fmt17(s.t) << ',' << detail::fmt17(s.u.x) << ','
           << detail::fmt17(s.u.y) << ','
           << (s.mode == Mode::Slip ? "slip" : "stick") << ',' << mark[i] << '\n';
    }
}

/// Reads a trajectory written by write_trajectory_csv.  Parameter and profile
/// snapshots are supplied by the caller (they are not part of the CSV); the
/// release directions of reloaded release events are recomputed from the
/// profile where defined.
inline Trajectory read_trajectory_csv(std::istream& is, const SimParams& params,
                                      const ForcingProfile& profile) {
    Trajectory traj;
    traj.params = params;
    traj.profile = profile;

    std::string line;
    if (!std::getline(is, line)) throw CsvError("empty trajectory CSV");
    if (line.ends_with('\r')) line.pop_back();
    if (line != "t,u_x,u_y,mode,event")
        throw CsvError("unexpected CSV header: " + line);

    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.ends_with('\r')) line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cells.size() != 5)
            throw CsvError("line " + std::to_string(lineno) + ": expected 5 columns");
        auto num = [&](const std::string& s) {
            char* end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (end == s.c_str() || *end != '\0')
                throw CsvError("line " + std::to_string(lineno) + ": bad number " + s);
            return v;
        };
        State s;
        s.t = num(cells[0]);
        s.u = {num(cells[1]), num(cells[2])};
        if (cells[3] == "slip") s.mode = Mode::Slip;
        else if (cells[3] == "stick") s.mode = Mode::Stick;
        else throw CsvError("line " + std::to_string(lineno) + ": bad mode " + cells[3]);
        traj.samples.push_back(s);

        if (cells[4] == "stick_onset") {
            traj.events.push_back({EventKind::StickOnset, s.t, {}});
        } else if (cells[4] == "stick_release") {
            const Vec2 vd = profile.derivative(s.t);
            std::optional<Vec2> dir;
            if (vd.norm() > 0.0) dir = unit(-vd);
            traj.events.push_back({EventKind::StickRelease, s.t, dir});
        } else if (!cells[4].empty()) {
            throw CsvError("line " + std::to_string(lineno) + ": bad event " + cells[4]);
        }
    }
    if (traj.samples.size() < 2) throw CsvError("trajectory CSV has fewer than 2 rows");
    for (std::size_t i = 1; i < traj.samples.size(); ++i)
        if (traj.samples[i].t < traj.samples[i - 1].t)
            throw CsvError("trajectory CSV times are not nondecreasing");
    return traj;
}

// ============================================================================
// JSON reports (field names mirror the report structs)
// ============================================================================

inline nlohmann::json report_json(const BoundCheck& c) {
    return {{"bound", c.bound}, {"value", c.value}, {"margin", c.margin}, {"ok", c.ok}};
}

inline nlohmann::json report_json(const BoundReport& r) {
    nlohmann::json j{{"sup_u", r.sup_u},
                     {"l2_udot", r.l2_udot},
                     {"l1_u", r.l1_u},
                     {"touched_zero", r.touched_zero},
                     {"udot_l2_bound", report_json(r.udot_l2_bound)},
                     {"friction_l1_bound", report_json(r.friction_l1_bound)},
                     {"energy_identity_max_err", r.energy_identity_max_err}};
    j["sup_bound"] = r.sup_bound ? report_json(*r.sup_bound) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json event_json(const Event& ev) {
    nlohmann::json j{{"kind", ev.kind == EventKind::StickOnset ? "stick_onset"
                                                               : "stick_release"},
                     {"t", ev.t}};
    j["release_dir"] = ev.release_dir
                           ? nlohmann::json::array({ev.release_dir->x, ev.release_dir->y})
                           : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json summary_json(const Trajectory& traj) {
    nlohmann::json events = nlohmann::json::array();
    for (const Event& ev : traj.events) events.push_back(event_json(ev));
    return {{"t0", traj.t0()},
            {"t1", traj.t1()},
            {"samples", traj.samples.size()},
            {"final_u", {traj.back().u.x, traj.back().u.y}},
            {"final_mode", traj.back().mode == Mode::Slip ? "slip" : "stick"},
            {"events", events}};
}

inline nlohmann::json report_json(const PeriodicSolveReport& r) {
    nlohmann::json j{{"converged", r.converged},
                     {"fixed_point", {r.fixed_point.x, r.fixed_point.y}},
                     {"residual", r.residual},
                     {"iterations", r.iterations},
                     {"trajectory", summary_json(r.trajectory)}};
    j["k"] = r.k ? nlohmann::json(*r.k) : nlohmann::json(nullptr);
    j["bounds"] = r.bounds ? report_json(*r.bounds) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json report_json(const ConvergenceStudy& s) {
    nlohmann::json rows = nlohmann::json::array();
    for (const ConvergenceRow& r : s.rows)
        rows.push_back({{"k", r.k},
                        {"sup_diff", r.sup_diff},
                        {"fixed_point_distance", r.fixed_point_distance}});
    return {{"rows", rows},
            {"reference_fixed_point",
             {s.reference_fixed_point.x, s.reference_fixed_point.y}},
            {"reference_residual", s.reference_residual},
            {"reference_source", s.reference_source},
            {"reference_k_final", s.reference_k_final}};
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceStudy& s) {
    os << "k,sup_diff,fixed_point_distance\n";
    for (const ConvergenceRow& r : s.rows)
        os << detail::fmt17(r.k) << ',' << detail::fmt17(r.sup_diff) << ','
           << detail::fmt17(r.fixed_point_distance) << '\n';
}

} // namespace stickslip
