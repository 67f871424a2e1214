#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "stickslip/forcing.hpp"
#include "stickslip/friction.hpp"
#include "stickslip/integrator.hpp"
#include "stickslip/regularized.hpp"
#include "stickslip/vec2.hpp"

namespace stickslip {

// ============================================================================
// Bound verification on a periodic trajectory
// ============================================================================

/// One inequality check: margin = bound - value, ok when the margin is no
/// worse than the quadrature/integration allowance.
struct BoundCheck {
    double bound = 0.0;
    double value = 0.0;
    double margin = 0.0;
    bool ok = false;
};

/// Allowance for discrete-norm truncation plus accumulated integration error
/// when deciding whether an analytic inequality holds numerically.
inline constexpr double kBoundSlack = 1e-6;

/// Discrete norms of a period-1 trajectory and the checks of the analytic
/// a-priori estimates against them.
struct BoundReport {
    double sup_u = 0.0;     ///< max_t |u|
    double l2_udot = 0.0;   ///< discrete L2 norm of du/dt
    double l1_u = 0.0;      ///< discrete L1 norm of |u|
    bool touched_zero = false;

    /// sup|u| <= ||dV/dt||_L2; claimed only for orbits that touch u = 0.
    std::optional<BoundCheck> sup_bound{};
    /// ||du/dt||_L2 <= ||dV/dt||_L2.
    BoundCheck udot_l2_bound{};
    /// sigma * ||u||_L1 <= ||V||_L2 * ||du/dt||_L2.
    BoundCheck friction_l1_bound{};
    /// Largest pointwise residual of the slip-phase energy-balance identity
    ///   |du/dt|^2 + sigma d|u|/dt + (dV/dt . du/dt) + (1/2k) d|u|^2/dt = 0,
    /// with the |u|-derivatives expanded by the chain rule (never differenced).
    double energy_identity_max_err = 0.0;
};

namespace detail {

/// Per-sample derivative for quadrature: the slip field away from zero, the
/// rest value during stick, and one-sided limits (direction borrowed from the
/// adjacent sample of the same regime) on the duplicated event rows.
inline Vec2 sample_udot(const Trajectory& traj, std::size_t i, const SimParams& P,
                        const ForcingProfile& profile) {
    const State& s = traj.samples[i];
    if (s.mode == Mode::Stick) return {0.0, 0.0};
    if (s.u.norm() > 0.0) return slip_field(s.t, s.u, P, profile);
    Vec2 dir{};
    if (i > 0 && traj.samples[i - 1].mode == Mode::Slip &&
        traj.samples[i - 1].u.norm() > 0.0) {
        dir = unit(traj.samples[i - 1].u);
    } else if (i + 1 < traj.samples.size() &&
               traj.samples[i + 1].mode == Mode::Slip &&
               traj.samples[i + 1].u.norm() > 0.0) {
        dir = unit(traj.samples[i + 1].u);
    } else {
        return {0.0, 0.0};
    }
    return dir * (-P.sigma) - profile.derivative(s.t);
}

} // namespace detail

/// Computes discrete norms of a trajectory spanning exactly [0, 1] by
/// composite trapezoid over the recorded grid (split at events, >= 4096
/// points), checks the a-priori estimates, and evaluates the slip-phase
/// energy identity pointwise.  Requires a periodic input:
/// |u(1) - u(0)| <= 10 * fp_tol.
inline BoundReport verify_bounds(const Trajectory& traj, const SimParams& params,
                                 const ForcingProfile& profile) {
    if (traj.samples.size() < 2) throw std::domain_error("trajectory too short");
    if (std::fabs(traj.t0()) > 1e-9 || std::fabs(traj.t1() - 1.0) > 1e-9)
        throw std::domain_error("verify_bounds requires a trajectory spanning [0, 1]");
    if ((traj.back().u - traj.front().u).norm() > 10.0 * params.fp_tol)
        throw std::domain_error("verify_bounds requires a periodic trajectory");

    const std::size_t n = traj.samples.size();
    std::vector<Vec2> udot(n);
    for (std::size_t i = 0; i < n; ++i)
        udot[i] = detail::sample_udot(traj, i, params, profile);

    BoundReport rep;
    const double inv_k = params.k ? 1.0 / *params.k : 0.0;
    double l1 = 0.0, l2sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const State& s = traj.samples[i];
        rep.sup_u = std::max(rep.sup_u, s.u.norm());
        if (s.u.norm() <= params.eps_stick) rep.touched_zero = true;
        if (i + 1 < n) {
            const double w = 0.5 * (traj.samples[i + 1].t - s.t);
            l1 += w * (s.u.norm() + traj.samples[i + 1].u.norm());
            l2sq += w * (udot[i].norm_sq() + udot[i + 1].norm_sq());
        }
        if (s.mode == Mode::Slip && s.u.norm() > params.eps_stick) {
            // Energy identity residual; d|u|/dt = (u.du/dt)/|u| by chain rule.
            const double uu = s.u.dot(udot[i]);
            const double r = udot[i].norm_sq() + params.sigma * uu / s.u.norm() +
                             profile.derivative(s.t).dot(udot[i]) + inv_k * uu;
            rep.energy_identity_max_err =
                std::max(rep.energy_identity_max_err, std::fabs(r));
        }
    }
    rep.touched_zero = rep.touched_zero || !traj.events.empty();
    rep.l1_u = l1;
    rep.l2_udot = std::sqrt(l2sq);

    const ForcingNorms nm = norms(profile);
    auto check = [](double bound, double value) {
        return BoundCheck{bound, value, bound - value, bound - value >= -kBoundSlack};
    };
    rep.udot_l2_bound = check(nm.l2_vdot, rep.l2_udot);
    rep.friction_l1_bound = check(nm.l2_v * rep.l2_udot, params.sigma * rep.l1_u);
    if (rep.touched_zero) rep.sup_bound = check(nm.l2_vdot, rep.sup_u);
    return rep;
}

// ============================================================================
// Periodic-orbit search
// ============================================================================

/// Result of the fixed-point search on the time-1 return map.
struct PeriodicSolveReport {
    bool converged = false;
    Vec2 fixed_point{};
    double residual = 0.0; ///< |T(u_n) - u_n| at the final iterate
    int iterations = 0;    ///< return-map evaluations performed
    std::optional<double> k{};
    Trajectory trajectory;               ///< one period from the fixed point
    std::optional<BoundReport> bounds{}; ///< present when converged
};

/// Fixed-point iteration u_{n+1} = T(u_n) of the return map from u_0 = 0,
/// stopping when |u_{n+1} - u_n| <= fp_tol.  Because the map is nonexpansive,
/// |T(u*) - u*| <= fp_tol holds for the reported point whenever the loop
/// converged.  With k set convergence is guaranteed (strict contraction);
/// without k the report says so honestly instead of throwing.
inline PeriodicSolveReport find_periodic(const SimParams& params,
                                         const ForcingProfile& profile, int max_iter,
                                         double fp_tol) {
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (!(fp_tol > 0.0)) throw std::invalid_argument("fp_tol must be > 0");
    SimParams P = params;
    P.fp_tol = fp_tol;
    P.validate();

    PeriodicSolveReport rep;
    rep.k = P.k;
    Vec2 u{0.0, 0.0};
    for (int it = 1; it <= max_iter; ++it) {
        const Vec2 v = flow(u, 0.0, 1.0, P, profile);
        rep.residual = (v - u).norm();
        rep.iterations = it;
        u = v;
        if (rep.residual <= fp_tol) {
            rep.converged = true;
            break;
        }
    }
    rep.fixed_point = u;
    rep.trajectory = simulate(u, 0.0, 1.0, P, profile);
    if (rep.converged) rep.bounds = verify_bounds(rep.trajectory, P, profile);
    return rep;
}

// ============================================================================
// Convergence of regularized orbits to the nonsmooth limit
// ============================================================================

struct ConvergenceRow {
    double k = 0.0;
    double sup_diff = 0.0;              ///< sup_t |u_k(t) - u_inf(t)|
    double fixed_point_distance = 0.0;  ///< |u_k(0) - u_inf(0)|
};

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;   ///< one per requested k, input order
    Vec2 reference_fixed_point{};
    double reference_residual = 0.0;    ///< |T(u*) - u*| on the event-driven map
    std::string reference_source;       ///< "direct-iteration" or "k-doubling-limit"
    double reference_k_final = 0.0;     ///< last k of the doubling path (0 if direct)
};

namespace detail {

struct FilippovReference {
    Vec2 fixed_point{};
    double residual = 0.0;
    std::string source;
    double k_final = 0.0;
};

/// Periodic point of the event-driven (k absent) system: direct iteration
/// when it converges, otherwise the limit of k-orbits with k doubling from
/// 1e3 until consecutive orbits agree to 1e-6 in sup norm.  Either way the
/// result is certified by the residual on the event-driven map itself.
inline FilippovReference filippov_reference(const SimParams& base,
                                            const ForcingProfile& profile, int max_iter,
                                            double fp_tol) {
    SimParams pf = base;
    pf.k.reset();
    FilippovReference ref;

    const PeriodicSolveReport direct = find_periodic(pf, profile, max_iter, fp_tol);
    if (direct.converged) {
        ref.fixed_point = direct.fixed_point;
        ref.source = "direct-iteration";
    } else {
        std::optional<Trajectory> prev;
        double kd = 1e3;
        for (int step = 0; step < 10; ++step, kd *= 2.0) {
            SimParams pk = base;
            pk.k = kd;
            const PeriodicSolveReport r = find_periodic(pk, profile, max_iter, fp_tol);
            if (!r.converged) {
                char buf[96];
                std::snprintf(buf, sizeof buf,
                              "reference orbit did not converge at k = %g", kd);
                throw std::runtime_error(buf);
            }
            ref.fixed_point = r.fixed_point;
            ref.k_final = kd;
            if (prev && sup_difference(r.trajectory, *prev) < 1e-6) break;
            prev = r.trajectory;
        }
        ref.source = "k-doubling-limit";
    }
    ref.residual = (flow(ref.fixed_point, 0.0, 1.0, pf, profile) - ref.fixed_point).norm();
    return ref;
}

} // namespace detail

/// For each k in k_list (>= 2 strictly increasing positive values), finds the
/// regularized periodic orbit and reports its sup-distance and fixed-point
/// distance to the event-driven limit orbit.  Distinct k values may be
/// evaluated concurrently (n_threads caps the workers); rows are merged in
/// input order, so the result does not depend on scheduling.
inline ConvergenceStudy convergence_study(const SimParams& base,
                                          const ForcingProfile& profile,
                                          const std::vector<double>& k_list,
                                          int max_iter, double fp_tol,
                                          unsigned n_threads = 1) {
    if (k_list.size() < 2)
        throw std::invalid_argument("convergence_study requires at least two k values");
    for (std::size_t i = 0; i < k_list.size(); ++i) {
        if (!(k_list[i] > 0.0))
            throw std::invalid_argument("convergence_study requires k > 0");
        if (i > 0 && !(k_list[i] > k_list[i - 1]))
            throw std::invalid_argument("convergence_study requires increasing k_list");
    }
    base.validate();

    const detail::FilippovReference ref =
        detail::filippov_reference(base, profile, max_iter, fp_tol);
    SimParams pf = base;
    pf.k.reset();
    const Trajectory ref_traj = simulate(ref.fixed_point, 0.0, 1.0, pf, profile);

    ConvergenceStudy study;
    study.reference_fixed_point = ref.fixed_point;
    study.reference_residual = ref.residual;
    study.reference_source = ref.source;
    study.reference_k_final = ref.k_final;
    study.rows.resize(k_list.size());

    std::vector<std::exception_ptr> errors(k_list.size());
    auto run_one = [&](std::size_t i) {
        try {
            SimParams pk = base;
            pk.k = k_list[i];
            const PeriodicSolveReport r = find_periodic(pk, profile, max_iter, fp_tol);
            if (!r.converged) {
                char buf[96];
                std::snprintf(buf, sizeof buf,
                              "find_periodic did not converge for k = %g", k_list[i]);
                throw std::runtime_error(buf);
            }
            study.rows[i] = {k_list[i], sup_difference(r.trajectory, ref_traj),
                             (r.fixed_point - ref.fixed_point).norm()};
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(
        n_threads, static_cast<unsigned>(k_list.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < k_list.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= k_list.size()) return;
                    run_one(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return study;
}

} // namespace stickslip
