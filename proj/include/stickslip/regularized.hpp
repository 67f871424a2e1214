#pragma once

#include <stdexcept>

#include "stickslip/forcing.hpp"
#include "stickslip/friction.hpp"
#include "stickslip/integrator.hpp"
#include "stickslip/vec2.hpp"

namespace stickslip {

// ============================================================================
// Time-1 return map of the regularized system
// ============================================================================

/// Radius R_k = k * sup|dV/dt| of the closed ball that the time-1 map of the
/// regularized system maps into itself.  Requires k to be set.
inline double invariant_radius(const SimParams& params, const ForcingProfile& profile) {
    if (!params.k) throw std::invalid_argument("invariant_radius requires k");
    return *params.k * norms(profile).sup_vdot;
}

/// Time-1 return map u0 -> u(1) of the flow started at t = 0.  With k set the
/// initial point must lie in the invariant ball (up to a relative rounding
/// allowance); without k any finite initial point is accepted.
inline Vec2 poincare_map(const Vec2& u0, const SimParams& params,
                         const ForcingProfile& profile) {
    params.validate();
    if (params.k) {
        const double r = invariant_radius(params, profile);
        if (u0.norm() > r * (1.0 + 1e-12) + 1e-12)
            throw std::domain_error("poincare_map: initial point outside invariant ball");
    }
    return flow(u0, 0.0, 1.0, params, profile);
}

/// Measured one-step contraction |T(u0) - T(w0)| / |u0 - w0| of the return
/// map.  Bounded by exp(-1/k) with regularization and by 1 without, up to
/// integration error; requires u0 != w0.
inline double map_contraction_factor(const Vec2& u0, const Vec2& w0,
                                     const SimParams& params,
                                     const ForcingProfile& profile) {
    const double d = (u0 - w0).norm();
    if (!(d > 0.0))
        throw std::invalid_argument("map_contraction_factor requires u0 != w0");
    const Vec2 a = poincare_map(u0, params, profile);
    const Vec2 b = poincare_map(w0, params, profile);
    return (a - b).norm() / d;
}

} // namespace stickslip
