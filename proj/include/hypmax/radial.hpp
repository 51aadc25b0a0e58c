#pragma once

// Deterministic integrals of radial functions over balls. For a ball B(x, r)
// with t = d(0, x) and a function g of the distance to the origin,
//   int_{B(x,r)} g(d(0,y)) dmu(y) = Omega_n int g(s) sinh^{n-1}(s) cap(s, t, r) ds,
// where cap is the fraction of the sphere S(0, s) inside B(x, r).

#include "hypmax/geometry.hpp"
#include "hypmax/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace hypmax {

/// Relative 1e-9, no absolute floor: weights span many orders of magnitude.
inline constexpr QuadTolerance kRadialTolerance{0.0, 1e-9, 4000};

/// Omega_n int_a^b g(s) sinh^{n-1}(s) cap(s, t, r) ds, i.e. the integral of g over
/// the part of B(x, r) at distance (a, b] from the origin. `breaks` lists
/// discontinuities of g.
template <class G>
double radial_cap_integral(const Dimension& dim, double t, double r, G&& g, double a, double b,
                           std::span<const double> breaks = {}, QuadTolerance tol = kRadialTolerance) {
    if (!(r > 0.0)) throw DomainError("radial_cap_integral: radius must be positive");
    if (!(t >= 0.0)) throw DomainError("radial_cap_integral: center offset must be nonnegative");
    const double lo = std::max({a, 0.0, t - r});
    const double hi = std::min(b, t + r);
    if (!(hi > lo)) return 0.0;

    std::vector<double> pts(breaks.begin(), breaks.end());
    pts.push_back(std::abs(t - r));
    auto grid = make_breakpoints(std::move(pts), lo, hi);
    const int m = dim.n() - 1;
    auto integrand = [&](double s) {
        const double c = cap_fraction(dim, s, t, r);
        if (c == 0.0) return 0.0;
        const double gv = g(s);
        if (gv == 0.0) return 0.0;
        return gv * c * std::pow(std::sinh(s), m);
    };
    auto res = integrate_piecewise(integrand, grid, tol);
    return dim.omega() * require_converged(res, "radial_cap_integral");
}

/// Integral of the radial function g over B(x, r), t = d(0, x).
template <class G>
double quad_radial_ball(const Dimension& dim, double t, double r, G&& g, std::span<const double> breaks = {},
                        QuadTolerance tol = kRadialTolerance) {
    return radial_cap_integral(dim, t, r, std::forward<G>(g), 0.0, t + r, breaks, tol);
}

/// Omega_n int_a^b g(s) sinh^{n-1}(s) ds: the integral of g over the shell a < d(0,.) <= b.
template <class G>
double radial_shell_integral(const Dimension& dim, G&& g, double a, double b, std::span<const double> breaks = {},
                             QuadTolerance tol = kRadialTolerance) {
    if (!(b > a)) return 0.0;
    std::vector<double> pts(breaks.begin(), breaks.end());
    auto grid = make_breakpoints(std::move(pts), std::max(0.0, a), b);
    const int m = dim.n() - 1;
    auto integrand = [&](double s) {
        const double gv = g(s);
        return gv == 0.0 ? 0.0 : gv * std::pow(std::sinh(s), m);
    };
    auto res = integrate_piecewise(integrand, grid, tol);
    return dim.omega() * require_converged(res, "radial_shell_integral");
}

/// Exact measure of B(x, r) cap B(y, s) for d = d(x, y).
inline double intersection_volume(const Dimension& dim, double d, double r, double s) {
    if (!(r > 0.0) || !(s > 0.0)) throw DomainError("intersection_volume: radii must be positive");
    if (d >= r + s) return 0.0;
    if (d + std::min(r, s) <= std::max(r, s)) return ball_volume(dim, std::min(r, s));
    return radial_cap_integral(dim, d, r, [](double) { return 1.0; }, 0.0, s);
}

} // namespace hypmax
