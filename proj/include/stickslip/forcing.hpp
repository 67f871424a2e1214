#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "stickslip/vec2.hpp"

namespace stickslip {

// ============================================================================
// Periodic forcing profile
// ============================================================================

/// Velocity profile of the vibrating plane as a truncated Fourier series with
/// period 1:
///
///   V(t) = mean + sum_n cos_coeffs[n-1] * cos(2*pi*n*t)
///               + sum_n sin_coeffs[n-1] * sin(2*pi*n*t)
///
/// The profile is immutable after construction; all accessors are const and
/// safe for concurrent reads.
struct ForcingProfile {
    Vec2 mean{};                    ///< constant term
    std::vector<Vec2> cos_coeffs;   ///< harmonics n = 1, 2, ...
    std::vector<Vec2> sin_coeffs;   ///< harmonics n = 1, 2, ...

    /// V(t).
    Vec2 value(double t) const {
        const double w = 2.0 * std::numbers::pi;
        Vec2 v = mean;
        const std::size_t nc = cos_coeffs.size(), ns = sin_coeffs.size();
        for (std::size_t n = 1; n <= std::max(nc, ns); ++n) {
            const double ph = w * static_cast<double>(n) * t;
            if (n <= nc) v += cos_coeffs[n - 1] * std::cos(ph);
            if (n <= ns) v += sin_coeffs[n - 1] * std::sin(ph);
        }
        return v;
    }

    /// dV/dt(t).
    Vec2 derivative(double t) const {
        const double w = 2.0 * std::numbers::pi;
        Vec2 v{};
        const std::size_t nc = cos_coeffs.size(), ns = sin_coeffs.size();
        for (std::size_t n = 1; n <= std::max(nc, ns); ++n) {
            const double wn = w * static_cast<double>(n);
            const double ph = wn * t;
            if (n <= nc) v -= cos_coeffs[n - 1] * (wn * std::sin(ph));
            if (n <= ns) v += sin_coeffs[n - 1] * (wn * std::cos(ph));
        }
        return v;
    }

    /// d2V/dt2(t).  Used by event diagnostics and error bounds.
    Vec2 second_derivative(double t) const {
        const double w = 2.0 * std::numbers::pi;
        Vec2 v{};
        const std::size_t nc = cos_coeffs.size(), ns = sin_coeffs.size();
        for (std::size_t n = 1; n <= std::max(nc, ns); ++n) {
            const double wn = w * static_cast<double>(n);
            const double ph = wn * t;
            if (n <= nc) v -= cos_coeffs[n - 1] * (wn * wn * std::cos(ph));
            if (n <= ns) v -= sin_coeffs[n - 1] * (wn * wn * std::sin(ph));
        }
        return v;
    }

    /// True when dV/dt vanishes identically (all non-constant coefficients
    /// zero).  Such profiles are accepted everywhere but carry no dynamics.
    bool trivial() const {
        auto all_zero = [](const std::vector<Vec2>& cs) {
            return std::all_of(cs.begin(), cs.end(),
                               [](const Vec2& c) { return c.x == 0.0 && c.y == 0.0; });
        };
        return all_zero(cos_coeffs) && all_zero(sin_coeffs);
    }
};

/// Norms of a forcing profile over one period.
struct ForcingNorms {
    double sup_vdot = 0.0;  ///< max_t |dV/dt|, C[0,1] norm
    double l2_vdot = 0.0;   ///< L2[0,1] norm of dV/dt
    double l2_v = 0.0;      ///< L2[0,1] norm of V
    bool trivial = false;   ///< dV/dt == 0 identically
};

namespace detail {

/// Golden-section maximisation of f on [a, b]; f assumed unimodal there.
/// Returns the best function value seen (including the endpoints).
template <typename F>
double golden_max(F&& f, double a, double b, double tol) {
    constexpr double invphi = 0.6180339887498949;  // 1/phi
    double best = std::max(f(a), f(b));
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        }
    }
    return std::max({best, f1, f2});
}

} // namespace detail

/// Exact L2 norms via the coefficient (Parseval) identity and the sup norm of
/// dV/dt via dense sampling (4096 points over the period) refined around every
/// sampled local maximum by golden-section search to 1e-12 in t.
inline ForcingNorms norms(const ForcingProfile& p) {
    ForcingNorms out;
    out.trivial = p.trivial();

    // Parseval: ||f||^2 = |a0|^2 + (1/2) sum (|a_n|^2 + |b_n|^2).
    const double w = 2.0 * std::numbers::pi;
    double v2 = p.mean.norm_sq();
    double d2 = 0.0;
    const std::size_t nc = p.cos_coeffs.size(), ns = p.sin_coeffs.size();
    for (std::size_t n = 1; n <= std::max(nc, ns); ++n) {
        const double wn = w * static_cast<double>(n);
        double cn2 = 0.0;
        if (n <= nc) cn2 += p.cos_coeffs[n - 1].norm_sq();
        if (n <= ns) cn2 += p.sin_coeffs[n - 1].norm_sq();
        v2 += 0.5 * cn2;
        d2 += 0.5 * wn * wn * cn2;
    }
    out.l2_v = std::sqrt(v2);
    out.l2_vdot = std::sqrt(d2);

    if (out.trivial) {
        out.sup_vdot = 0.0;
        return out;
    }

    // Sup norm of |dV/dt|: sample, then refine each local maximum.
    constexpr int kSamples = 4096;
    auto g = [&p](double t) { return p.derivative(t).norm(); };
    std::vector<double> gs(kSamples);
    for (int i = 0; i < kSamples; ++i) gs[i] = g(static_cast<double>(i) / kSamples);
    double best = 0.0;
    const double h = 1.0 / kSamples;
    for (int i = 0; i < kSamples; ++i) {
        const double prev = gs[(i + kSamples - 1) % kSamples];
        const double next = gs[(i + 1) % kSamples];
        best = std::max(best, gs[i]);
        if (gs[i] >= prev && gs[i] >= next) {
            const double t = static_cast<double>(i) / kSamples;
            best = std::max(best, detail::golden_max(g, t - h, t + h, 1e-12));
        }
    }
    out.sup_vdot = best;
    return out;
}

} // namespace stickslip
