#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "stickslip/forcing.hpp"
#include "stickslip/vec2.hpp"

namespace stickslip {

// ============================================================================
// Simulation parameters
// ============================================================================

/// Parameters of the slip/stick dynamics and of the numerical scheme.
///
/// The slip velocity u obeys, away from u = 0,
///
///   du/dt = -sigma * u/|u| - dV/dt(t)  [ - u/k when k is set ],
///
/// where sigma is the Coulomb friction coefficient and k an optional
/// regularization index (larger k = weaker extra damping).
struct SimParams {
    double sigma = 0.0;            ///< friction coefficient, must be > 0
    std::optional<double> k{};     ///< regularization index, > 0 when set

    double eps_stick = 0.0;   ///< capture radius: |u| <= eps_stick snaps to 0
    double event_tol = 1e-12; ///< event-time bisection tolerance
    double dt_max = 1e-2;     ///< max integration / event-scan step
    double rel_tol = 1e-10;   ///< relative error tolerance per step
    double abs_tol = 1e-12;   ///< absolute error tolerance per step
    double fp_tol = 1e-10;    ///< fixed-point residual tolerance

    /// Throws std::invalid_argument on any violated invariant.
    void validate() const {
        auto fail = [](const char* msg) { throw std::invalid_argument(msg); };
        if (!(std::isfinite(sigma) && sigma > 0.0)) fail("sigma must be > 0");
        if (k && !(std::isfinite(*k) && *k > 0.0)) fail("k must be > 0 when set");
        if (!(eps_stick > 0.0)) fail("eps_stick must be > 0");
        if (!(eps_stick < 1e-3 * sigma)) fail("eps_stick must be < 1e-3 * sigma");
        if (!(event_tol > 0.0)) fail("event_tol must be > 0");
        if (!(event_tol < dt_max)) fail("event_tol must be < dt_max");
        if (!(rel_tol > 0.0 && abs_tol > 0.0)) fail("rel_tol and abs_tol must be > 0");
        if (!(fp_tol > 0.0)) fail("fp_tol must be > 0");
    }
};

/// Defaults for a given friction coefficient.  eps_stick scales with sigma so
/// that the capture radius stays far below every other length in the problem.
inline SimParams default_params(double sigma) {
    SimParams p;
    p.sigma = sigma;
    p.eps_stick = 1e-9 * std::max(sigma, 1.0);
    return p;
}

// ============================================================================
// Right-hand side as a set-valued map
// ============================================================================

/// Value of the (convexified) right-hand side at one point: a singleton away
/// from u = 0 and a closed disk at u = 0.
enum class SetKind { Singleton, Disk };

struct FilippovSet {
    SetKind kind = SetKind::Singleton;
    Vec2 value{};        ///< the single value, or the disk centre
    double radius = 0.0; ///< 0 for singletons

    /// Euclidean distance from p to the set (0 when p lies inside the disk).
    double distance_to(const Vec2& p) const {
        const double d = (p - value).norm();
        return kind == SetKind::Disk ? std::max(0.0, d - radius) : d;
    }

    bool contains(const Vec2& p, double tol = 0.0) const {
        return distance_to(p) <= tol;
    }
};

/// Slip-phase right-hand side; requires |u| > 0.
inline Vec2 slip_field(double t, const Vec2& u, const SimParams& params,
                       const ForcingProfile& profile) {
    const double n = u.norm();
    if (!(n > 0.0)) throw std::domain_error("slip_field requires |u| > 0");
    Vec2 f = u * (-params.sigma / n) - profile.derivative(t);
    if (params.k) f -= u * (1.0 / *params.k);
    return f;
}

/// The full set-valued right-hand side: the singleton {slip_field} away from
/// zero, and at u = 0 the closed disk of radius sigma centred at -dV/dt(t)
/// (the convex hull of the friction-circle limits; the regularization term
/// vanishes at u = 0).  The disk form is insensitive to how the friction law
/// is pointwise defined at the origin.
inline FilippovSet filippov_set(double t, const Vec2& u, const SimParams& params,
                                const ForcingProfile& profile) {
    if (u.norm() > 0.0)
        return {SetKind::Singleton, slip_field(t, u, params, profile), 0.0};
    return {SetKind::Disk, -profile.derivative(t), params.sigma};
}

/// Distance of a candidate derivative udot to the admissible set at (t, u).
/// Zero (up to tolerance) certifies a generalized solution pointwise.
inline double residual_distance(double t, const Vec2& u, const Vec2& udot,
                                const SimParams& params, const ForcingProfile& profile) {
    return filippov_set(t, u, params, profile).distance_to(udot);
}

/// Whether the rest state u = 0 is admissible at time t: |dV/dt(t)| <= sigma.
/// Ties count as admissible (the disk is closed).
inline bool stick_admissible(double t, const SimParams& params,
                             const ForcingProfile& profile) {
    return profile.derivative(t).norm_sq() <= params.sigma * params.sigma;
}

/// Monotonicity gap (v - w) . (Phi(v) - Phi(w)) of the friction force
/// Phi(u) = -sigma u/|u|.  Nonpositive for every pair of nonzero arguments;
/// this one-sided Lipschitz property is what makes the flow nonexpansive.
inline double monotonicity_gap(const Vec2& v, const Vec2& w, double sigma) {
    if (!(v.norm() > 0.0) || !(w.norm() > 0.0))
        throw std::invalid_argument("monotonicity_gap requires nonzero arguments");
    const Vec2 phi_v = v * (-sigma / v.norm());
    const Vec2 phi_w = w * (-sigma / w.norm());
    return (v - w).dot(phi_v - phi_w);
}

} // namespace stickslip
