// Command-line front end: simulate trajectories, locate periodic orbits,
// run regularization convergence studies, and re-verify stored trajectories.
//
// Exit codes: 0 on success, 2 for configuration problems (bad file, bad JSON,
// violated constraints), 3 for numerical failures (non-convergence, stiffness,
// nonfinite states, violated bounds).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "stickslip/stickslip.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    bool csv = false;
    bool json = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON run configuration")
        ->required();
    cmd->add_option("--out", opts.out_dir, "output directory (default: .)");
    cmd->add_flag("--csv", opts.csv, "write CSV output");
    cmd->add_flag("--json", opts.json, "write JSON report");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw stickslip::ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_out(const CommonOpts& opts, const std::string& name) {
    std::filesystem::create_directories(opts.out_dir);
    const std::filesystem::path p = std::filesystem::path(opts.out_dir) / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
}

unsigned worker_threads() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("STICKSLIP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) n = static_cast<unsigned>(v);
    }
    return n;
}

void print_events(const stickslip::Trajectory& traj) {
    for (const auto& ev : traj.events) {
        std::cout << "  event "
                  << (ev.kind == stickslip::EventKind::StickOnset ? "stick_onset "
                                                                  : "stick_release")
                  << " t = " << ev.t;
        if (ev.release_dir)
            std::cout << "  dir = (" << ev.release_dir->x << ", " << ev.release_dir->y
                      << ")";
        std::cout << '\n';
    }
}

int run_simulate(const stickslip::RunConfig& cfg, const CommonOpts& opts) {
    using namespace stickslip;
    const Trajectory traj =
        simulate(cfg.u0, cfg.t0, cfg.t1, cfg.params(), cfg.forcing);
    std::cout << "simulated [" << cfg.t0 << ", " << cfg.t1 << "]: "
              << traj.samples.size() << " samples, " << traj.events.size()
              << " events\n";
    print_events(traj);
    std::cout << "  final u = (" << traj.back().u.x << ", " << traj.back().u.y
              << ")  mode = "
              << (traj.back().mode == Mode::Slip ? "slip" : "stick") << '\n';
    if (opts.csv) {
        auto out = open_out(opts, "simulate.csv");
        write_trajectory_csv(out, traj);
    }
    if (opts.json) {
        auto out = open_out(opts, "simulate.json");
        out << summary_json(traj).dump(2) << '\n';
    }
    return kExitOk;
}

void print_bounds(const stickslip::BoundReport& b) {
    auto line = [](const char* name, const stickslip::BoundCheck& c) {
        std::cout << "  " << name << ": value = " << c.value
                  << "  bound = " << c.bound << "  margin = " << c.margin << "  "
                  << (c.ok ? "ok" : "VIOLATED") << '\n';
    };
    std::cout << "  touched_zero = " << (b.touched_zero ? "true" : "false") << '\n';
    if (b.sup_bound) line("sup_bound        ", *b.sup_bound);
    line("udot_l2_bound    ", b.udot_l2_bound);
    line("friction_l1_bound", b.friction_l1_bound);
    std::cout << "  energy_identity_max_err = " << b.energy_identity_max_err << '\n';
}

bool bounds_ok(const stickslip::BoundReport& b) {
    return (!b.sup_bound || b.sup_bound->ok) && b.udot_l2_bound.ok &&
           b.friction_l1_bound.ok &&
           b.energy_identity_max_err <= stickslip::kBoundSlack;
}

int run_periodic(const stickslip::RunConfig& cfg, const CommonOpts& opts) {
    using namespace stickslip;
    const PeriodicSolveReport rep =
        find_periodic(cfg.params(), cfg.forcing, cfg.max_iter, cfg.fp_tol);
    std::cout << (rep.converged ? "converged" : "NOT converged") << " after "
              << rep.iterations << " map evaluations, residual = " << rep.residual
              << "\n  fixed point = (" << rep.fixed_point.x << ", "
              << rep.fixed_point.y << ")\n";
    if (rep.bounds) print_bounds(*rep.bounds);
    if (opts.csv) {
        auto out = open_out(opts, "periodic.csv");
        write_trajectory_csv(out, rep.trajectory);
    }
    if (opts.json) {
        auto out = open_out(opts, "periodic.json");
        out << report_json(rep).dump(2) << '\n';
    }
    return rep.converged ? kExitOk : kExitNumerical;
}

int run_converge(const stickslip::RunConfig& cfg, const CommonOpts& opts) {
    using namespace stickslip;
    std::vector<double> k_list = cfg.k_list;
    if (k_list.empty()) k_list = {1e3, 1e4};
    const ConvergenceStudy study = convergence_study(
        cfg.params(), cfg.forcing, k_list, cfg.max_iter, cfg.fp_tol, worker_threads());
    std::cout << "reference: " << study.reference_source << ", fixed point = ("
              << study.reference_fixed_point.x << ", " << study.reference_fixed_point.y
              << "), event-driven residual = " << study.reference_residual << '\n';
    std::cout << "k,sup_diff,fixed_point_distance\n";
    for (const auto& row : study.rows)
        std::cout << row.k << ',' << row.sup_diff << ',' << row.fixed_point_distance
                  << '\n';
    if (opts.csv) {
        auto out = open_out(opts, "converge.csv");
        write_convergence_csv(out, study);
    }
    if (opts.json) {
        auto out = open_out(opts, "converge.json");
        out << report_json(study).dump(2) << '\n';
    }
    return kExitOk;
}

int run_verify(const stickslip::RunConfig& cfg, const CommonOpts& opts,
               const std::string& traj_path) {
    using namespace stickslip;
    std::ifstream in(traj_path, std::ios::binary);
    if (!in) throw ConfigError("cannot open trajectory file: " + traj_path);
    const Trajectory traj = read_trajectory_csv(in, cfg.params(), cfg.forcing);
    const BoundReport rep = verify_bounds(traj, cfg.params(), cfg.forcing);
    std::cout << "verified " << traj.samples.size() << " samples\n";
    print_bounds(rep);
    if (opts.json) {
        auto out = open_out(opts, "verify.json");
        out << report_json(rep).dump(2) << '\n';
    }
    return bounds_ok(rep) ? kExitOk : kExitNumerical;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-driven stick-slip dynamics simulator"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string traj_path;
    CLI::App* sim = app.add_subcommand("simulate", "integrate one trajectory");
    add_common(sim, opts);
    CLI::App* per = app.add_subcommand("periodic", "locate the periodic orbit");
    add_common(per, opts);
    CLI::App* con = app.add_subcommand("converge",
                                       "compare regularized orbits with the limit");
    add_common(con, opts);
    CLI::App* ver = app.add_subcommand("verify", "re-check bounds on a stored CSV");
    add_common(ver, opts);
    ver->add_option("--trajectory", traj_path, "trajectory CSV to verify")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        const stickslip::RunConfig cfg =
            stickslip::parse_config(read_file(opts.config_path));
        if (sim->parsed()) return run_simulate(cfg, opts);
        if (per->parsed()) return run_periodic(cfg, opts);
        if (con->parsed()) return run_converge(cfg, opts);
        if (ver->parsed()) return run_verify(cfg, opts, traj_path);
        return kExitConfig;
    } catch (const stickslip::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const stickslip::CsvError& e) {
        std::cerr << "trajectory error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}
