#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>

#include "stickslip/config.hpp"
#include "stickslip/io.hpp"
#include "stickslip/periodic.hpp"

using namespace stickslip;

namespace {

ForcingProfile reference_drive() {
    ForcingProfile p;
    p.sin_coeffs = {{0.5, 0.0}};
    return p;
}

std::string error_of(const std::string& text) {
    try {
        (void)parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("minimal config fills documented defaults", "[config]") {
    const RunConfig cfg = parse_config(R"({"sigma":0.3,"forcing":{"sin":[[0.5,0.0]]}})");
    CHECK(cfg.sigma == 0.3);
    REQUIRE(cfg.forcing.sin_coeffs.size() == 1);
    CHECK(cfg.forcing.sin_coeffs[0] == Vec2{0.5, 0.0});
    CHECK(cfg.forcing.cos_coeffs.empty());
    CHECK(cfg.forcing.mean == Vec2{0.0, 0.0});
    CHECK_FALSE(cfg.k.has_value());
    CHECK(cfg.k_list.empty());
    CHECK(cfg.u0 == Vec2{0.0, 0.0});
    CHECK(cfg.t0 == 0.0);
    CHECK(cfg.t1 == 1.0);
    CHECK(cfg.fp_tol == 1e-10);
    CHECK(cfg.event_tol == 1e-12);
    CHECK(cfg.dt_max == 1e-2);
    CHECK(cfg.eps_stick == 1e-9); // 1e-9 * max(sigma, 1)
    CHECK(cfg.rel_tol == 1e-10);
    CHECK(cfg.abs_tol == 1e-12);
    CHECK(cfg.max_iter == 20000);
    CHECK_FALSE(cfg.seed.has_value());
    REQUIRE_NOTHROW(cfg.params());
    CHECK(cfg.params().sigma == 0.3);
}

TEST_CASE("config errors name the offending field", "[config]") {
    CHECK(error_of(R"({"forcing":{"sin":[[0.5,0]]}})") == "missing field sigma");
    CHECK(error_of(R"({"sigma":-1,"forcing":{"sin":[[0.5,0]]}})") ==
          "sigma must be > 0");
    CHECK(error_of(R"({"sigma":0})") == "sigma must be > 0");
    CHECK(error_of(R"({"sigma":1,"bogus":2})") == "unknown field bogus");
    CHECK(error_of(R"({"sigma":1,"forcing":{"amp":1}})") ==
          "unknown field forcing.amp");
    CHECK(error_of(R"({"sigma":1,"tolerances":{"foo":1}})") ==
          "unknown field tolerances.foo");
    CHECK(error_of(R"({"sigma":1,"u0":[1]})") ==
          "field u0 must be an array of two numbers");
    CHECK(error_of(R"({"sigma":1,"t_span":[1,0]})") == "t_span must be increasing");
    CHECK(error_of(R"({"sigma":1,"k_list":[100,10]})") ==
          "k_list must be strictly increasing");
    CHECK(error_of(R"({"sigma":1,"k":0})") == "k must be > 0");
    CHECK(error_of(R"({"sigma":1,"max_iter":1.5})") == "max_iter must be an integer");
    CHECK(error_of(R"({"sigma":1,"max_iter":0})") == "max_iter must be >= 1");
    CHECK(error_of(R"({"sigma":"x"})") == "field sigma must be a number");

    // Violations of the numeric-parameter invariants surface as ConfigError
    // too, carrying the constraint name.
    CHECK(error_of(R"({"sigma":0.3,"tolerances":{"eps_stick":1.0}})") ==
          "eps_stick must be < 1e-3 * sigma");
}

TEST_CASE("malformed documents report a parse position", "[config]") {
    const std::string msg = error_of("{\"sigma\":");
    CHECK(msg.rfind("config parse error:", 0) == 0);
    CHECK(msg.find("parse error") != std::string::npos);

    CHECK(error_of("[1,2]") == "config must be a JSON object");
}

TEST_CASE("config serialization round-trips exactly", "[config]") {
    RunConfig cfg;
    cfg.sigma = 0.3;
    cfg.forcing.mean = {0.1, -0.2};
    cfg.forcing.cos_coeffs = {{0.3, 0.1}};
    cfg.forcing.sin_coeffs = {{0.5, 0.0}, {0.0, 0.25}};
    cfg.k = 100.0;
    cfg.k_list = {1e3, 1e4};
    cfg.u0 = {0.2, 0.1};
    cfg.t0 = -0.5;
    cfg.t1 = 2.5;
    cfg.fp_tol = 1e-9;
    cfg.event_tol = 1e-13;
    cfg.dt_max = 5e-3;
    cfg.eps_stick = 2e-10;
    cfg.rel_tol = 1e-11;
    cfg.abs_tol = 1e-13;
    cfg.max_iter = 777;
    cfg.seed = 42;

    const RunConfig back = parse_config(to_json(cfg));
    CHECK(back.sigma == cfg.sigma);
    CHECK(back.forcing.mean == cfg.forcing.mean);
    REQUIRE(back.forcing.cos_coeffs.size() == 1);
    CHECK(back.forcing.cos_coeffs[0] == cfg.forcing.cos_coeffs[0]);
    REQUIRE(back.forcing.sin_coeffs.size() == 2);
    CHECK(back.forcing.sin_coeffs[0] == cfg.forcing.sin_coeffs[0]);
    CHECK(back.forcing.sin_coeffs[1] == cfg.forcing.sin_coeffs[1]);
    REQUIRE(back.k.has_value());
    CHECK(*back.k == 100.0);
    CHECK(back.k_list == cfg.k_list);
    CHECK(back.u0 == cfg.u0);
    CHECK(back.t0 == cfg.t0);
    CHECK(back.t1 == cfg.t1);
    CHECK(back.fp_tol == cfg.fp_tol);
    CHECK(back.event_tol == cfg.event_tol);
    CHECK(back.dt_max == cfg.dt_max);
    CHECK(back.eps_stick == cfg.eps_stick);
    CHECK(back.rel_tol == cfg.rel_tol);
    CHECK(back.abs_tol == cfg.abs_tol);
    CHECK(back.max_iter == cfg.max_iter);
    REQUIRE(back.seed.has_value());
    CHECK(*back.seed == 42);
}

TEST_CASE("trajectory CSV round-trips bit-faithfully", "[io]") {
    const ForcingProfile drive = reference_drive();
    const SimParams p = default_params(0.3);
    // Starting at rest where rest is inadmissible yields an instant release
    // event plus a pass-through crossing later in the period.
    const Trajectory traj = simulate({0.0, 0.0}, 0.0, 1.0, p, drive);
    REQUIRE_FALSE(traj.events.empty()); // scenario exercises event markers

    std::ostringstream out;
    write_trajectory_csv(out, traj);
    std::istringstream in(out.str());
    const Trajectory back = read_trajectory_csv(in, p, drive);

    REQUIRE(back.samples.size() == traj.samples.size());
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        CHECK(back.samples[i].t == traj.samples[i].t);
        CHECK(back.samples[i].u.x == traj.samples[i].u.x);
        CHECK(back.samples[i].u.y == traj.samples[i].u.y);
        CHECK(back.samples[i].mode == traj.samples[i].mode);
    }
    REQUIRE(back.events.size() == traj.events.size());
    for (std::size_t i = 0; i < traj.events.size(); ++i) {
        CHECK(back.events[i].kind == traj.events[i].kind);
        CHECK(back.events[i].t == traj.events[i].t);
        if (traj.events[i].release_dir) {
            REQUIRE(back.events[i].release_dir.has_value());
            CHECK(*back.events[i].release_dir == *traj.events[i].release_dir);
        }
    }
}

TEST_CASE("reloaded trajectories verify like fresh ones", "[io]") {
    const ForcingProfile drive = reference_drive();
    const PeriodicSolveReport rep =
        find_periodic(default_params(0.3), drive, 20000, 1e-10);
    REQUIRE(rep.converged);

    std::ostringstream out;
    write_trajectory_csv(out, rep.trajectory);
    std::istringstream in(out.str());
    const Trajectory back = read_trajectory_csv(in, rep.trajectory.params, drive);

    const BoundReport fresh = *rep.bounds;
    const BoundReport again = verify_bounds(back, rep.trajectory.params, drive);
    CHECK(again.sup_u == fresh.sup_u);
    CHECK(again.l2_udot == fresh.l2_udot);
    CHECK(again.l1_u == fresh.l1_u);
    CHECK(again.touched_zero == fresh.touched_zero);
    CHECK(again.udot_l2_bound.ok);
    CHECK(again.friction_l1_bound.ok);
}

TEST_CASE("malformed trajectory CSVs are rejected", "[io]") {
    const ForcingProfile drive = reference_drive();
    const SimParams p = default_params(0.3);
    auto reject = [&](const std::string& text) {
        std::istringstream in(text);
        REQUIRE_THROWS_AS(read_trajectory_csv(in, p, drive), CsvError);
    };
    reject("");                                                  // empty
    reject("t,ux,uy,mode,event\n0,0,0,slip,\n1,0,0,slip,\n");    // bad header
    reject("t,u_x,u_y,mode,event\n0,0,0,flip,\n1,0,0,slip,\n");  // bad mode
    reject("t,u_x,u_y,mode,event\n0,0,0,slip\n1,0,0,slip,\n");   // 4 columns
    reject("t,u_x,u_y,mode,event\n0,abc,0,slip,\n1,0,0,slip,\n");// bad number
    reject("t,u_x,u_y,mode,event\n0,0,0,slip,\n");               // single row
    reject("t,u_x,u_y,mode,event\n1,0,0,slip,\n0,0,0,slip,\n");  // decreasing t
    reject("t,u_x,u_y,mode,event\n0,0,0,slip,boom\n1,0,0,slip,\n"); // bad event
}

TEST_CASE("JSON reports mirror the result structs", "[io]") {
    const ForcingProfile drive = reference_drive();
    const PeriodicSolveReport rep =
        find_periodic(default_params(7.0), drive, 20000, 1e-10);
    const nlohmann::json j = report_json(rep);

    CHECK(j["converged"] == true);
    CHECK(j["iterations"] == 1);
    CHECK(j["residual"] == 0.0);
    CHECK(j["fixed_point"][0] == 0.0);
    CHECK(j["k"].is_null());
    REQUIRE(j.contains("bounds"));
    CHECK(j["bounds"]["touched_zero"] == true);
    CHECK(j["bounds"]["udot_l2_bound"]["ok"] == true);
    CHECK(j["bounds"]["friction_l1_bound"]["ok"] == true);
    CHECK(j["bounds"]["sup_bound"]["ok"] == true);

    const nlohmann::json s = summary_json(rep.trajectory);
    CHECK(s["t0"] == 0.0);
    CHECK(s["t1"] == 1.0);
    CHECK(s["samples"] == rep.trajectory.samples.size());
    CHECK(s["final_mode"] == "stick");
    CHECK(s["events"].is_array());
}

TEST_CASE("convergence CSV serializes with full precision", "[io]") {
    ConvergenceStudy study;
    study.rows = {{1e3, 1.25e-4, 3.5e-5}, {1e4, 1.25e-5, 3.5e-6}};
    std::ostringstream out;
    write_convergence_csv(out, study);

    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "k,sup_diff,fixed_point_distance");
    double k = 0.0, sd = 0.0, fpd = 0.0;
    char c = 0;
    in >> k >> c >> sd >> c >> fpd;
    CHECK(k == 1e3);
    CHECK(sd == 1.25e-4);
    CHECK(fpd == 3.5e-5);
}
