#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stickslip/forcing.hpp"
#include "stickslip/friction.hpp"
#include "stickslip/vec2.hpp"

namespace stickslip {

// ============================================================================
// Trajectory data model
// ============================================================================

enum class Mode { Slip, Stick };

struct State {
    double t = 0.0;
    Vec2 u{};
    Mode mode = Mode::Slip;
};

enum class EventKind { StickOnset, StickRelease };

struct Event {
    EventKind kind = EventKind::StickOnset;
    double t = 0.0;
    /// Unit re-emission direction; present on StickRelease only.
    std::optional<Vec2> release_dir{};
};

/// Output sample spacing: samples are emitted on the absolute grid of
/// multiples of kSampleDt in addition to every accepted step endpoint, so a
/// trajectory carries at least 4096 points per unit interval, split at events.
inline constexpr double kSampleDt = 1.0 / 4096.0;

/// A simulated trajectory: time-ordered samples (event times appear twice,
/// as left and right limits), the event log, and snapshots of the inputs.
struct Trajectory {
    std::vector<State> samples;
    std::vector<Event> events;
    SimParams params{};
    ForcingProfile profile{};

    const State& front() const { return samples.front(); }
    const State& back() const { return samples.back(); }
    double t0() const { return samples.front().t; }
    double t1() const { return samples.back().t; }

    /// Piecewise-linear evaluation between recorded samples (exact at
    /// samples; both rows of a duplicated event time agree).
    Vec2 eval(double t) const {
        if (samples.empty()) throw std::logic_error("empty trajectory");
        if (t <= samples.front().t) return samples.front().u;
        if (t >= samples.back().t) return samples.back().u;
        auto it = std::lower_bound(samples.begin(), samples.end(), t,
                                   [](const State& s, double x) { return s.t < x; });
        if (it->t == t) return it->u;
        const State& b = *it;
        const State& a = *(it - 1);
        if (b.t == a.t) return b.u;
        const double w = (t - a.t) / (b.t - a.t);
        return a.u * (1.0 - w) + b.u * w;
    }
};

/// Largest pointwise distance between two trajectories over the overlap of
/// their spans, probed on a uniform grid of n_samples points.
inline double sup_difference(const Trajectory& a, const Trajectory& b,
                             int n_samples = 8192) {
    const double lo = std::max(a.t0(), b.t0());
    const double hi = std::min(a.t1(), b.t1());
    if (!(hi > lo)) throw std::invalid_argument("trajectories do not overlap");
    double best = 0.0;
    for (int i = 0; i <= n_samples; ++i) {
        const double t = lo + (hi - lo) * static_cast<double>(i) / n_samples;
        best = std::max(best, (a.eval(t) - b.eval(t)).norm());
    }
    return best;
}

// ============================================================================
// Errors
// ============================================================================

namespace detail {
inline std::string time_msg(const char* what, double t) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s at t = %.17g", what, t);
    return buf;
}
} // namespace detail

/// Step size underflowed below the resolvable scale away from u = 0.
class StiffnessError : public std::runtime_error {
public:
    explicit StiffnessError(double t)
        : std::runtime_error(detail::time_msg("step size underflow (stiff segment)", t)),
          t_(t) {}
    double time() const { return t_; }
private:
    double t_;
};

/// A state or stage stopped being finite.
class NonFiniteError : public std::runtime_error {
public:
    explicit NonFiniteError(double t)
        : std::runtime_error(detail::time_msg("nonfinite state", t)), t_(t) {}
    double time() const { return t_; }
private:
    double t_;
};

// ============================================================================
// Release direction
// ============================================================================

/// Direction of re-emission from the rest state when sticking stops being
/// admissible: the unit vector along -dV/dt(t).  Requires |dV/dt(t)| > sigma.
inline Vec2 release_direction(double t, const SimParams& params,
                              const ForcingProfile& profile) {
    const Vec2 vd = profile.derivative(t);
    if (!(vd.norm() > params.sigma))
        throw std::domain_error("release_direction requires |dV/dt(t)| > sigma");
    return unit(-vd);
}

// ============================================================================
// Integration internals
// ============================================================================

namespace detail {

/// Sample/event sink.  A null trajectory pointer turns all recording off
/// (used by the endpoint-only flow map); recording never feeds back into
/// the stepping arithmetic, so recorded and unrecorded runs step identically.
struct Recorder {
    Trajectory* traj = nullptr;
    long long next_grid = 0;

    void init(double t0) {
        next_grid = static_cast<long long>(std::floor(t0 / kSampleDt)) + 1;
        while (grid_time() <= t0) ++next_grid;
    }
    double grid_time() const { return static_cast<double>(next_grid) * kSampleDt; }
    void emit(const State& s) {
        if (traj) traj->samples.push_back(s);
        while (grid_time() <= s.t) ++next_grid;
    }
    void event(EventKind kind, double t, std::optional<Vec2> dir = {}) {
        if (traj) traj->events.push_back({kind, t, dir});
    }
};

/// One embedded Dormand-Prince 5(4) step attempt with FSAL.
struct StepTry {
    bool ok = false;     ///< false when a stage hit u = 0 exactly
    double err = 0.0;    ///< scaled error norm (accept when <= 1)
    Vec2 u_new{};
    Vec2 f_new{};        ///< derivative at (t+h, u_new), reusable (FSAL)
};

template <typename Rhs>
StepTry dopri_step(double t, const Vec2& u, double h, const Vec2& f1, Rhs&& rhs,
                   double rel_tol, double abs_tol) {
    constexpr double A21 = 1.0 / 5;
    constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
    constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
    constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187,
                     A53 = 64448.0 / 6561, A54 = -212.0 / 729;
    constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                     A64 = 49.0 / 176, A65 = -5103.0 / 18656;
    constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                     B5 = -2187.0 / 6784, B6 = 11.0 / 84;
    constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920,
                     E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40;
    constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;

    StepTry out;
    Vec2 k2, k3, k4, k5, k6;
    if (!rhs(t + C2 * h, u + (f1 * A21) * h, k2)) return out;
    if (!rhs(t + C3 * h, u + (f1 * A31 + k2 * A32) * h, k3)) return out;
    if (!rhs(t + C4 * h, u + (f1 * A41 + k2 * A42 + k3 * A43) * h, k4)) return out;
    if (!rhs(t + C5 * h, u + (f1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h, k5))
        return out;
    if (!rhs(t + h, u + (f1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h, k6))
        return out;
    const Vec2 u_new = u + (f1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6) * h;
    Vec2 k7;
    if (!rhs(t + h, u_new, k7)) return out;

    const Vec2 e = (f1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
    const double scx = abs_tol + rel_tol * std::max(std::fabs(u.x), std::fabs(u_new.x));
    const double scy = abs_tol + rel_tol * std::max(std::fabs(u.y), std::fabs(u_new.y));
    const double ex = e.x / scx, ey = e.y / scy;

    out.ok = true;
    out.err = std::sqrt(0.5 * (ex * ex + ey * ey));
    out.u_new = u_new;
    out.f_new = k7;
    if (!u_new.finite() || !std::isfinite(out.err)) {
        out.err = std::numeric_limits<double>::infinity();
    }
    return out;
}

/// Cubic Hermite interpolant over one accepted step.
inline Vec2 hermite(double theta, const Vec2& y0, const Vec2& y1, const Vec2& f0,
                    const Vec2& f1, double h) {
    const double t2 = theta * theta, t3 = t2 * theta;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + theta;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return y0 * h00 + f0 * (h10 * h) + y1 * h01 + f1 * (h11 * h);
}

struct SlipOutcome {
    bool zero_hit = false; ///< |u| reached the capture radius (u snapped to 0)
    double t = 0.0;
    Vec2 u{};
};

/// Adaptive slip-phase integration of du/dt = -sigma u/|u| - dV/dt - u/k from
/// (t, u) with |u| > eps_stick, until either t_stop or capture at u = 0.
/// Emits grid samples and accepted step endpoints; the caller owns all rows
/// and event records at a zero hit.
template <typename Rhs>
SlipOutcome slip_advance(double t, Vec2 u, double t_stop, double h0, Rhs&& rhs,
                         const SimParams& P, Recorder& rec) {
    constexpr double kMinStep = 1e-13;
    const double eps2 = P.eps_stick * P.eps_stick;

    Vec2 f;
    if (!rhs(t, u, f)) return {true, t, {0.0, 0.0}};
    double h = std::clamp(h0, 1e-9, P.dt_max);

    for (;;) {
        if (t_stop - t <= 1e-14) return {false, t_stop, u};
        h = std::min({h, P.dt_max, t_stop - t});

        const StepTry s =
            dopri_step(t, u, h, f, rhs, P.rel_tol, P.abs_tol);
        if (!s.ok || !(s.err <= 1.0)) {
            double fac = 0.2;
            if (s.ok && std::isfinite(s.err) && s.err > 1.0)
                fac = std::clamp(0.9 * std::pow(s.err, -0.2), 0.2, 0.9);
            h *= fac;
            if (h < kMinStep) {
                // Step collapse happens only against the u = 0 kink; anywhere
                // else the field is smooth and this is a genuine failure.
                if (u.norm() <= 1e3 * P.eps_stick) return {true, t, {0.0, 0.0}};
                throw StiffnessError(t);
            }
            continue;
        }

        // Capture event g(t) = |u(t)|^2 - eps_stick^2 on the dense output.
        double theta_lo = 0.0, theta_hi = -1.0;
        for (int j = 1; j <= 8; ++j) {
            const double th = static_cast<double>(j) / 8.0;
            const Vec2 uj = (j == 8) ? s.u_new : hermite(th, u, s.u_new, f, s.f_new, h);
            if (uj.norm_sq() - eps2 <= 0.0) {
                theta_hi = th;
                break;
            }
            theta_lo = th;
        }
        if (theta_hi > 0.0) {
            // Earliest crossing: bisection to event_tol in time.
            double a = theta_lo, b = theta_hi;
            while ((b - a) * h > P.event_tol) {
                const double m = 0.5 * (a + b);
                const Vec2 um = hermite(m, u, s.u_new, f, s.f_new, h);
                if (um.norm_sq() - eps2 <= 0.0) b = m; else a = m;
            }
            const double t_ev = t + b * h;
            while (rec.grid_time() < t_ev) {
                const double g = rec.grid_time();
                rec.emit({g, hermite((g - t) / h, u, s.u_new, f, s.f_new, h), Mode::Slip});
            }
            return {true, t_ev, {0.0, 0.0}};
        }

        // Accepted, no event: emit interior grid points and the endpoint.
        const double t_new = t + h;
        while (rec.grid_time() < t_new) {
            const double g = rec.grid_time();
            rec.emit({g, hermite((g - t) / h, u, s.u_new, f, s.f_new, h), Mode::Slip});
        }
        rec.emit({t_new, s.u_new, Mode::Slip});

        t = t_new;
        u = s.u_new;
        f = s.f_new;
        if (!u.finite()) throw NonFiniteError(t);
        const double fac =
            (s.err > 0.0) ? std::clamp(0.9 * std::pow(s.err, -0.2), 0.2, 5.0) : 5.0;
        h *= fac;
    }
}

/// Composite Simpson integral of max(0, |dV/dt| - sigma) over [a, b].
inline double excess_speed_integral(double a, double b, const SimParams& P,
                                    const ForcingProfile& profile) {
    constexpr int kPanels = 16;
    auto phi = [&](double s) {
        return std::max(0.0, profile.derivative(s).norm() - P.sigma);
    };
    const double h = (b - a) / (2 * kPanels);
    double acc = phi(a) + phi(b);
    for (int i = 1; i < 2 * kPanels; ++i) acc += phi(a + h * i) * ((i % 2) ? 4.0 : 2.0);
    return acc * h / 3.0;
}

/// Analytic restart from u = 0 at t_r.  Integrates the radial growth law
/// d|u|/dt = |dV/dt| - sigma until |u| clears the capture radius comfortably
/// (or the horizon cuts in), and aims the result along the instantaneous
/// re-emission direction at the end time; direction slaving makes that
/// second-order accurate even at a tangential release where |dV/dt(t_r)| =
/// sigma exactly.  Returns the restart state.
inline State micro_release(double t_r, double t_stop, const SimParams& P,
                           const ForcingProfile& profile) {
    const double m_target = 100.0 * P.eps_stick;
    const double h_max = t_stop - t_r;
    if (!(h_max > 0.0)) return {t_stop, {0.0, 0.0}, Mode::Slip};

    auto m_of = [&](double h) { return excess_speed_integral(t_r, t_r + h, P, profile); };

    double h = std::min(1e-9, h_max);
    double lo = 0.0;
    while (m_of(h) < m_target && h < h_max) {
        lo = h;
        h = std::min(2.0 * h, h_max);
    }
    double m = m_of(h);
    if (m >= m_target) {
        double hi = h;
        for (int i = 0; i < 40; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (m_of(mid) >= m_target) hi = mid; else lo = mid;
        }
        h = hi;
        m = m_of(h);
    }
    const double t2 = t_r + h;
    const Vec2 vd = profile.derivative(t2);
    const double n = vd.norm();
    if (!(n > 0.0) || m <= 0.0) return {t2, {0.0, 0.0}, Mode::Slip};
    return {t2, unit(-vd) * m, Mode::Slip};
}

/// Stick-phase scan: starting stuck at t_from, locate the first time in
/// (t_from, t_stop] where |dV/dt| exceeds sigma strictly.  The scan walks the
/// absolute grid of dt_max multiples so that every run brackets a given
/// release inside the same interval, which pins the bisected release time to
/// identical bits regardless of where the orbit stuck.  Ties |dV/dt| = sigma
/// count as still admissible.
inline std::optional<double> stick_release_time(double t_from, double t_stop,
                                                const SimParams& P,
                                                const ForcingProfile& profile) {
    auto excess = [&](double x) {
        return profile.derivative(x).norm_sq() - P.sigma * P.sigma;
    };
    long long n = static_cast<long long>(std::floor(t_from / P.dt_max));
    double left = static_cast<double>(n) * P.dt_max;
    if (!(left < t_from) || excess(left) > 0.0) left = t_from;

    for (;;) {
        ++n;
        double right = static_cast<double>(n) * P.dt_max;
        const bool last = right >= t_stop;
        if (last) right = t_stop;
        if (excess(right) > 0.0) {
            double a = left, b = right;
            while (b - a > P.event_tol) {
                const double mid = 0.5 * (a + b);
                if (excess(mid) > 0.0) b = mid; else a = mid;
            }
            return 0.5 * (a + b);
        }
        if (last) return std::nullopt;
        left = right;
    }
}

/// Full event-driven integration core shared by simulate() and flow().
inline State integrate_core(const Vec2& u0, double t0, double t1, const SimParams& P,
                            const ForcingProfile& profile, Trajectory* sink) {
    P.validate();
    if (!(t1 > t0)) throw std::invalid_argument("simulate requires t1 > t0");
    if (!u0.finite()) throw std::invalid_argument("initial state must be finite");

    const double inv_k = P.k ? 1.0 / *P.k : 0.0;
    auto rhs = [&](double tt, const Vec2& uu, Vec2& out) -> bool {
        const double n2 = uu.norm_sq();
        if (!(n2 > 0.0)) return false;
        const double n = std::sqrt(n2);
        out = uu * (-P.sigma / n - inv_k) - profile.derivative(tt);
        return true;
    };

    Recorder rec{sink, 0};
    rec.init(t0);
    if (sink) {
        sink->params = P;
        sink->profile = profile;
        sink->samples.reserve(
            static_cast<std::size_t>((t1 - t0) / kSampleDt) + 64);
    }

    double t = t0;
    Vec2 u = u0;
    Mode mode;
    double h_hint = 1e-3;

    if (u.norm() <= P.eps_stick) {
        u = {0.0, 0.0};
        if (stick_admissible(t0, P, profile)) {
            mode = Mode::Stick;
            rec.emit({t0, u, Mode::Stick});
        } else {
            // Inadmissible rest state: instantaneous re-emission, no onset.
            mode = Mode::Slip;
            rec.emit({t0, u, Mode::Slip});
            rec.event(EventKind::StickRelease, t0, unit(-profile.derivative(t0)));
            const State s = micro_release(t0, t1, P, profile);
            rec.emit(s);
            t = s.t;
            u = s.u;
            h_hint = std::max(s.t - t0, 1e-9);
            if (t >= t1) return {t1, u, Mode::Slip};
        }
    } else {
        mode = Mode::Slip;
        rec.emit({t0, u, Mode::Slip});
    }

    while (t < t1) {
        if (mode == Mode::Slip) {
            const SlipOutcome so = slip_advance(t, u, t1, h_hint, rhs, P, rec);
            if (!so.zero_hit) return {t1, so.u, Mode::Slip};

            // Arrival at u = 0 (left event row), then stick or pass through.
            t = so.t;
            u = {0.0, 0.0};
            rec.emit({t, u, Mode::Slip});
            rec.event(EventKind::StickOnset, t);
            if (stick_admissible(t, P, profile)) {
                mode = Mode::Stick;
                rec.emit({t, u, Mode::Stick});
            } else {
                const Vec2 dir = unit(-profile.derivative(t));
                rec.event(EventKind::StickRelease, t, dir);
                rec.emit({t, u, Mode::Slip});
                const State s = micro_release(t, t1, P, profile);
                rec.emit(s);
                h_hint = std::max(s.t - t, 1e-9);
                t = s.t;
                u = s.u;
                if (t >= t1) return {t1, u, Mode::Slip};
            }
        } else {
            const std::optional<double> rel = stick_release_time(t, t1, P, profile);
            const double t_end = rel ? std::min(*rel, t1) : t1;
            while (rec.grid_time() < t_end)
                rec.emit({rec.grid_time(), {0.0, 0.0}, Mode::Stick});
            if (!rel || *rel >= t1) {
                rec.emit({t1, {0.0, 0.0}, Mode::Stick});
                return {t1, {0.0, 0.0}, Mode::Stick};
            }
            const double t_r = *rel;
            rec.emit({t_r, {0.0, 0.0}, Mode::Stick});
            const Vec2 vd = profile.derivative(t_r);
            rec.event(EventKind::StickRelease, t_r,
                      vd.norm() > 0.0 ? std::optional<Vec2>(unit(-vd)) : std::nullopt);
            rec.emit({t_r, {0.0, 0.0}, Mode::Slip});
            const State s = micro_release(t_r, t1, P, profile);
            rec.emit(s);
            h_hint = std::max(s.t - t_r, 1e-9);
            t = s.t;
            u = s.u;
            mode = Mode::Slip;
            if (t >= t1) return {t1, u, Mode::Slip};
        }
    }
    return {t1, u, mode};
}

} // namespace detail

// ============================================================================
// Public integration API
// ============================================================================

/// Event-driven simulation of the slip/stick dynamics over [t0, t1].
/// Records dense samples (>= 4096 per unit interval, duplicated rows at event
/// times) and the ordered event log.  Deterministic: identical inputs produce
/// bit-identical trajectories.
inline Trajectory simulate(const Vec2& u0, double t0, double t1, const SimParams& params,
                           const ForcingProfile& profile) {
    Trajectory traj;
    const State last = detail::integrate_core(u0, t0, t1, params, profile, &traj);
    if (traj.samples.empty() || traj.samples.back().t < last.t)
        traj.samples.push_back(last);
    return traj;
}

/// Endpoint of the same integration, with recording switched off.  Steps
/// bit-identically to simulate(); use it wherever only u(t1) matters.
inline Vec2 flow(const Vec2& u0, double t0, double t1, const SimParams& params,
                 const ForcingProfile& profile) {
    return detail::integrate_core(u0, t0, t1, params, profile, nullptr).u;
}

} // namespace stickslip
