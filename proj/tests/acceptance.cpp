// Acceptance gate: one self-contained binary that checks every published
// guarantee of the library at its stated tolerance and prints exactly one
// PASS/FAIL line per criterion.  Exits nonzero if any criterion fails.
//
// All tolerances are pinned here as named constants; every reference value
// is produced by an independent oracle (closed form, bisection, quadrature,
// or a separately written fixed-step integrator -- see oracles.hpp).

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stickslip/stickslip.hpp"

using namespace stickslip;

namespace {

constexpr double kPi = std::numbers::pi;

// ---- pinned acceptance tolerances ------------------------------------------
constexpr double kTolMonotonicity = 1e-12; // criterion 2: max allowed gap
constexpr double kTolContraction = 1e-6;   // criterion 3: factor slack
constexpr double kTolResidual = 1e-10;     // criterion 5: |T(u*) - u*|
constexpr double kTolPeriodicity = 1e-9;   // criterion 5: |u(1) - u(0)|
constexpr double kTolBound = 1e-6;         // criteria 6, 7: estimate slack
constexpr double kTolConvergence = 1e-4;   // criterion 8: sup differences
constexpr double kMonotoneSlack = 1.10;    // criterion 8: monotonicity slack
constexpr double kTolOracle = 1e-5;        // criterion 9: vs fixed-step RK4
constexpr double kTolRelease = 1e-9;       // criterion 10: release time
// -----------------------------------------------------------------------------

int failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail) {
    std::printf("%s  criterion-%02d  %-24s %s\n", ok ? "PASS" : "FAIL", idx, name,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

/// Deterministic splitmix64-based uniform generator, identical on every
/// platform (no library distribution involved).
struct Rng {
    std::uint64_t s;
    explicit Rng(std::uint64_t seed) : s(seed) {}
    std::uint64_t next() {
        s += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double range(double a, double b) { return a + (b - a) * uniform(); }
};

ForcingProfile reference_drive() {
    ForcingProfile p;
    p.sin_coeffs = {{0.5, 0.0}};
    return p;
}

// 1. sigma = 7 dominates the drive: the periodic solution is rest, found
//    exactly in one map evaluation with no events.
void criterion_1(const ForcingProfile& drive) {
    const PeriodicSolveReport rep =
        find_periodic(default_params(7.0), drive, 20000, 1e-10);
    bool all_rest = true;
    for (const State& s : rep.trajectory.samples)
        all_rest = all_rest && s.u.x == 0.0 && s.u.y == 0.0 && s.mode == Mode::Stick;
    const bool ok = rep.converged && rep.iterations == 1 && rep.residual == 0.0 &&
                    rep.fixed_point == Vec2{0.0, 0.0} && rep.trajectory.events.empty() &&
                    all_rest;
    report(1, "stick-regime-rest", ok,
           fmt("residual = %g, events = %zu, iterations = %d", rep.residual,
               rep.trajectory.events.size(), rep.iterations));
}

// 2. The friction force is monotone: (v - w) . (Phi(v) - Phi(w)) <= 0 up to
//    rounding, over 1e5 random nonzero pairs and several sigma.
void criterion_2() {
    Rng rng(0x5EED0001ull);
    const double sigmas[3] = {0.3, 1.0, 7.0};
    double worst = -1e300;
    for (int i = 0; i < 100000; ++i) {
        Vec2 v{rng.range(-3.0, 3.0), rng.range(-3.0, 3.0)};
        Vec2 w{rng.range(-3.0, 3.0), rng.range(-3.0, 3.0)};
        if (v.norm() < 1e-9) v.x += 1.0;
        if (w.norm() < 1e-9) w.y += 1.0;
        worst = std::max(worst, monotonicity_gap(v, w, sigmas[i % 3]));
    }
    report(2, "monotone-friction", worst <= kTolMonotonicity,
           fmt("max gap = %.3g (allowed %.1g)", worst, kTolMonotonicity));
}

// 3. The time-1 map contracts with factor <= e^{-1/k} when regularized and
//    is nonexpansive without regularization, over 50 random pairs each.
void criterion_3(const ForcingProfile& drive) {
    Rng rng(0x5EED0002ull);
    bool ok = true;
    std::string detail;
    for (const double k : {10.0, 100.0}) {
        SimParams p = default_params(0.3);
        p.k = k;
        const double r = invariant_radius(p, drive);
        const double limit = std::exp(-1.0 / k) + kTolContraction;
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            Vec2 a{rng.range(-0.7, 0.7) * r, rng.range(-0.7, 0.7) * r};
            Vec2 b{rng.range(-0.7, 0.7) * r, rng.range(-0.7, 0.7) * r};
            if ((a - b).norm() < 1e-3 * r) b.x += 0.1 * r;
            worst = std::max(worst, map_contraction_factor(a, b, p, drive));
        }
        ok = ok && worst <= limit;
        detail += fmt("k=%g: %.8f <= %.8f; ", k, worst, limit);
    }
    {
        const SimParams p = default_params(0.3);
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            Vec2 a{rng.range(-2.0, 2.0), rng.range(-2.0, 2.0)};
            Vec2 b{rng.range(-2.0, 2.0), rng.range(-2.0, 2.0)};
            if ((a - b).norm() < 0.05) b.x += 0.5;
            worst = std::max(worst, map_contraction_factor(a, b, p, drive));
        }
        ok = ok && worst <= 1.0 + kTolContraction;
        detail += fmt("no k: %.8f <= 1 + %g", worst, kTolContraction);
    }
    report(3, "map-contraction", ok, detail);
}

// 4. The closed ball of radius k sup|dV/dt| is invariant: boundary points map
//    strictly inside.
void criterion_4(const ForcingProfile& drive) {
    SimParams p = default_params(0.3);
    p.k = 10.0;
    const double r = invariant_radius(p, drive);
    double min_margin = 1e300;
    for (int j = 0; j < 100; ++j) {
        const double a = 2.0 * kPi * j / 100.0;
        const Vec2 u0{r * std::cos(a), r * std::sin(a)};
        min_margin = std::min(min_margin, r - poincare_map(u0, p, drive).norm());
    }
    report(4, "invariant-ball", min_margin > 0.0,
           fmt("radius = %.6f, min margin = %.6f", r, min_margin));
}

// 5. The regularized periodic orbit exists and is found to tolerance.
PeriodicSolveReport criterion_5(const ForcingProfile& drive) {
    SimParams p = default_params(0.3);
    p.k = 100.0;
    const PeriodicSolveReport rep = find_periodic(p, drive, 20000, 1e-10);
    const double residual =
        (poincare_map(rep.fixed_point, p, drive) - rep.fixed_point).norm();
    const double gap = (rep.trajectory.back().u - rep.trajectory.front().u).norm();
    const bool ok = rep.converged && residual <= kTolResidual && gap <= kTolPeriodicity;
    report(5, "periodic-orbit", ok,
           fmt("|T(u*) - u*| = %.3g (<= %g), |u(1) - u(0)| = %.3g (<= %g)", residual,
               kTolResidual, gap, kTolPeriodicity));
    return rep;
}

// 6. The a-priori estimates hold on that orbit: sup|u| and the discrete L2
//    norm of du/dt are bounded by ||dV/dt||_L2 = pi/sqrt(2), and sigma times
//    the L1 norm of u by ||V||_L2 ||du/dt||_L2.
void criterion_6(const PeriodicSolveReport& rep) {
    if (!rep.bounds) {
        report(6, "a-priori-bounds", false, "no bound report (orbit not converged)");
        return;
    }
    const BoundReport& b = *rep.bounds;
    const double parseval_l2_vdot = kPi / std::sqrt(2.0);
    const double parseval_l2_v = 0.5 / std::sqrt(2.0);
    const bool bound_values_ok =
        std::fabs(b.udot_l2_bound.bound - parseval_l2_vdot) <= 1e-12 &&
        std::fabs(b.friction_l1_bound.bound - parseval_l2_v * b.l2_udot) <= 1e-12;
    const bool sup_ok = b.touched_zero && b.sup_bound && b.sup_bound->ok;
    const bool ok = sup_ok && b.udot_l2_bound.ok && b.friction_l1_bound.ok &&
                    bound_values_ok;
    report(6, "a-priori-bounds", ok,
           fmt("sup|u| = %.5f <= %.5f, l2(du) = %.5f <= %.5f, s*l1(u) = %.5f <= %.5f",
               b.sup_u, b.sup_bound ? b.sup_bound->bound : 0.0, b.l2_udot,
               b.udot_l2_bound.bound, b.friction_l1_bound.value,
               b.friction_l1_bound.bound));
}

// 7. The pointwise energy-balance identity holds on the slip samples.
void criterion_7(const PeriodicSolveReport& rep) {
    const double err = rep.bounds ? rep.bounds->energy_identity_max_err : 1e300;
    report(7, "energy-identity", err <= kTolBound,
           fmt("max residual = %.3g (<= %g)", err, kTolBound));
}

// 8. Regularized orbits converge to the event-driven limit orbit: the sup
//    differences k=1e3 vs 1e4 and k=1e4 vs the limit are both small and the
//    distance to the limit is monotone in k (within slack).
void criterion_8(const ForcingProfile& drive) {
    const SimParams base = default_params(0.3);
    const ConvergenceStudy study =
        convergence_study(base, drive, {1e3, 1e4}, 20000, 1e-10, 2);

    SimParams p3 = base, p4 = base;
    p3.k = 1e3;
    p4.k = 1e4;
    const PeriodicSolveReport r3 = find_periodic(p3, drive, 20000, 1e-10);
    const PeriodicSolveReport r4 = find_periodic(p4, drive, 20000, 1e-10);
    const double d34 = sup_difference(r3.trajectory, r4.trajectory);
    const double d4inf = study.rows[1].sup_diff;
    const double d3inf = study.rows[0].sup_diff;

    const bool ok = d34 <= kTolConvergence && d4inf <= kTolConvergence &&
                    d4inf <= kMonotoneSlack * d3inf && study.reference_residual <= 1e-9;
    report(8, "regularization-limit", ok,
           fmt("sup(1e3,1e4) = %.3g, sup(1e4,lim) = %.3g (<= %g), sup(1e3,lim) = %.3g",
               d34, d4inf, kTolConvergence, d3inf));
}

// 9. The event-driven integrator agrees with an independently written dense
//    fixed-step RK4 on a smooth regularized scenario that stays off u = 0.
void criterion_9(const ForcingProfile& drive) {
    SimParams p = default_params(0.3);
    p.k = 1e6;
    const Trajectory traj = simulate({1.0, 0.0}, 0.0, 2.0, p, drive);

    std::vector<double> times;
    times.reserve(2049);
    for (int j = 0; j <= 2048; ++j) times.push_back(j / 1024.0);
    const std::vector<oracle::PathPoint> ref =
        oracle::rk4_path(0.3, 1e6, 1.0, 0.0, 0.0, 1e-6, times);

    double sup = 0.0, min_norm = 1e300;
    for (const oracle::PathPoint& q : ref) {
        sup = std::max(sup, (traj.eval(q.t) - Vec2{q.ux, q.uy}).norm());
        min_norm = std::min(min_norm, std::hypot(q.ux, q.uy));
    }
    const bool scenario_valid = min_norm > 0.05 && traj.events.empty();
    report(9, "oracle-equivalence", scenario_valid && sup <= kTolOracle,
           fmt("sup diff = %.3g (<= %g), min |u| = %.3f", sup, kTolOracle, min_norm));
}

// 10. The stick-release event time matches the scalar root of
//     pi |cos 2 pi t| = sigma to tight tolerance.
void criterion_10(const ForcingProfile& drive) {
    const Trajectory traj = simulate({0.0, 0.0}, 0.24, 0.4, default_params(0.3), drive);
    double t_event = -1.0;
    for (const Event& ev : traj.events)
        if (ev.kind == EventKind::StickRelease) {
            t_event = ev.t;
            break;
        }
    const double root = oracle::bisect(
        [](double t) { return kPi * (-std::cos(2.0 * kPi * t)) - 0.3; }, 0.25, 0.3,
        1e-14);
    const bool ok = t_event >= 0.0 && std::fabs(t_event - root) <= kTolRelease &&
                    std::fabs(root - oracle::kReleaseRoot) <= 1e-12;
    report(10, "release-accuracy", ok,
           fmt("event t = %.15f, root = %.15f, diff = %.3g (<= %g)", t_event, root,
               t_event >= 0.0 ? std::fabs(t_event - root) : -1.0, kTolRelease));
}

} // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    const ForcingProfile drive = reference_drive();

    criterion_1(drive);
    criterion_2();
    criterion_3(drive);
    criterion_4(drive);
    const PeriodicSolveReport rep5 = criterion_5(drive);
    criterion_6(rep5);
    criterion_7(rep5);
    criterion_8(drive);
    criterion_9(drive);
    criterion_10(drive);

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("acceptance: %d/10 criteria passed in %.1f s\n", 10 - failures, secs);
    return failures == 0 ? 0 : 1;
}
