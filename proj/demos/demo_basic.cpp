// Minimal tour of the library: forcing norms, one event-driven trajectory,
// the periodic orbit with its a-priori bounds, and a short convergence study.

#include <cstdio>

#include "stickslip/stickslip.hpp"

int main() {
    using namespace stickslip;

    // Horizontal cosine drive: V(t) has velocity (0.5 sin 2πt, 0).
    ForcingProfile profile;
    profile.sin_coeffs = {{0.5, 0.0}};

    const ForcingNorms nm = norms(profile);
    std::printf("forcing norms: sup|Vdot| = %.12g  L2(Vdot) = %.12g  L2(V) = %.12g\n",
                nm.sup_vdot, nm.l2_vdot, nm.l2_v);

    SimParams params = default_params(0.3);

    // One trajectory from rest over three periods.
    const Trajectory traj = simulate({0.0, 0.0}, 0.0, 3.0, params, profile);
    std::printf("trajectory: %zu samples, %zu stick/slip events, final |u| = %.6g\n",
                traj.samples.size(), traj.events.size(), traj.back().u.norm());

    // The genuinely set-valued flow still has a unique periodic orbit.
    const PeriodicSolveReport rep = find_periodic(params, profile, 20000, 1e-10);
    std::printf("periodic orbit: converged = %s  residual = %.3g  u* = (%.12g, %.12g)\n",
                rep.converged ? "yes" : "no", rep.residual, rep.fixed_point.x,
                rep.fixed_point.y);
    if (rep.bounds) {
        std::printf("  sup|u| = %.6g  (bound %.6g)\n", rep.bounds->sup_u,
                    rep.bounds->udot_l2_bound.bound);
        std::printf("  L2(udot) = %.6g <= %.6g : %s\n", rep.bounds->udot_l2_bound.value,
                    rep.bounds->udot_l2_bound.bound,
                    rep.bounds->udot_l2_bound.ok ? "ok" : "violated");
        std::printf("  sigma*L1(u) = %.6g <= %.6g : %s\n",
                    rep.bounds->friction_l1_bound.value,
                    rep.bounds->friction_l1_bound.bound,
                    rep.bounds->friction_l1_bound.ok ? "ok" : "violated");
    }

    // Smooth regularizations approach the event-driven orbit as k grows.
    const ConvergenceStudy study =
        convergence_study(params, profile, {1e2, 1e3, 1e4}, 20000, 1e-10, 2);
    std::printf("convergence vs %s reference:\n", study.reference_source.c_str());
    for (const auto& row : study.rows)
        std::printf("  k = %-8g sup_diff = %.6g\n", row.k, row.sup_diff);

    return 0;
}
