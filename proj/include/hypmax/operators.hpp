#pragma once

// Fractional averages A_{r,alpha} f(x) = mu(B(x,r))^{alpha/n - 1} int_{B(x,r)} |f|
// and the centered fractional maximal operator M_alpha as a grid maximum over r,
// split into the local part (r <= 2) and the far part (r > 2). alpha = 0 gives
// the plain averages and the Hardy-Littlewood operator M.

#include "hypmax/field.hpp"
#include "hypmax/monte_carlo.hpp"
#include "hypmax/radial.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hypmax {

enum class Engine { quad, mc };

namespace detail {

inline void check_alpha(const Dimension& dim, double alpha) {
    if (!(alpha >= 0.0 && alpha < dim.n())) throw DomainError("alpha must lie in [0, n)");
}

inline double volume_factor(const Dimension& dim, double alpha, double r) {
    return std::pow(ball_volume(dim, r), alpha / dim.n() - 1.0);
}

/// int_{B(x,r)} |f| for a radial profile, t = d(0, x).
inline double radial_mass(const Dimension& dim, const RadialProfile& f, double t, double r) {
    if (f.compact() && r <= t - f.support_radius()) return 0.0;
    const auto breaks = f.breakpoints();
    return quad_radial_ball(dim, t, r, [&f](double s) { return std::abs(f(s)); }, breaks);
}

} // namespace detail

/// A_{r,alpha} f(x) with its Monte Carlo standard error (0 on the quadrature path).
inline McEstimate avg_fractional_estimate(const Dimension& dim, double alpha, const ScalarField& f, const HPoint& x,
                                          double r, Engine engine, const McConfig& mc = {}) {
    detail::check_alpha(dim, alpha);
    if (!(r > 0.0)) throw DomainError("avg_fractional: radius must be positive");
    const double scale = detail::volume_factor(dim, alpha, r);
    McEstimate out;
    if (engine == Engine::quad) {
        const RadialProfile* hint = f.radial_hint();
        if (!hint) throw DomainError("avg_fractional: the quad engine needs a radial field");
        out.value = scale * detail::radial_mass(dim, *hint, ScalarField::distance_from_origin(x), r);
        return out;
    }
    const double t = ScalarField::distance_from_origin(x);
    if (r <= t - f.support_radius()) {
        out.samples = mc.samples;
        return out;
    }
    out = mc_integrate_ball(dim, x, r, [&f](const HPoint& y) { return std::abs(f(y)); }, mc);
    out.value *= scale;
    out.std_error *= scale;
    return out;
}

inline double avg_fractional(const Dimension& dim, double alpha, const ScalarField& f, const HPoint& x, double r,
                             Engine engine, const McConfig& mc = {}) {
    return avg_fractional_estimate(dim, alpha, f, x, r, engine, mc).value;
}

/// Plain average of |f| over B(x, r) (alpha = 0).
inline double avg_plain(const Dimension& dim, const ScalarField& f, const HPoint& x, double r, Engine engine,
                        const McConfig& mc = {}) {
    return avg_fractional(dim, 0.0, f, x, r, engine, mc);
}

struct MaximalResult {
    double value = 0.0;
    /// Radius attaining the maximum (0 when f vanishes on every ball).
    double radius = 0.0;
    /// The maximum sits on the last radius of the scanned range.
    bool boundary_hit = false;
};

namespace detail {

/// Candidate radii in (lo, hi]: the grid radii plus, for step profiles, the
/// radii where the sphere S(x, r) touches a jump sphere S(0, b). Radii that
/// cannot beat the others are pruned: with supp f in B(0, rho), balls with
/// r <= t - rho carry no mass, and beyond r = t + rho the mass is constant, so
/// only the smallest such radius matters when alpha < n.
inline std::vector<double> candidate_radii(std::vector<double> grid, const ScalarField& f, double t, double lo,
                                           double hi) {
    if (const RadialProfile* hint = f.radial_hint(); hint && hint->interp() == Interp::step) {
        for (double b : hint->breakpoints()) {
            for (double r : {t + b, std::abs(t - b)}) {
                if (r > lo && r <= hi) grid.push_back(r);
            }
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const double rho = f.support_radius();
    if (!std::isfinite(rho)) return grid;
    std::vector<double> out;
    for (double r : grid) {
        if (r <= t - rho) continue;
        out.push_back(r);
        if (r >= t + rho) break;
    }
    return out;
}

inline MaximalResult scan_radii(const Dimension& dim, double alpha, const ScalarField& f, const HPoint& x,
                                const std::vector<double>& grid, double lo, double hi, Engine engine,
                                const McConfig& mc) {
    MaximalResult best;
    if (grid.empty()) return best;
    const double t = ScalarField::distance_from_origin(x);
    const auto radii = candidate_radii(grid, f, t, lo, hi);
    for (double r : radii) {
        const double v = avg_fractional(dim, alpha, f, x, r, engine, mc);
        if (v > best.value) {
            best.value = v;
            best.radius = r;
        }
    }
    best.boundary_hit = best.value > 0.0 && best.radius >= hi - 1e-12 && !(best.radius >= t + f.support_radius());
    return best;
}

} // namespace detail

/// sup over the local radii {local_step, 2 local_step, ..., 2}.
inline MaximalResult maximal_local(const Dimension& dim, double alpha, const ScalarField& f, const HPoint& x,
                                   const RadiusGrid& grid, Engine engine, const McConfig& mc = {}) {
    grid.validate();
    detail::check_alpha(dim, alpha);
    return detail::scan_radii(dim, alpha, f, x, grid.local_radii(), 0.0, 2.0, engine, mc);
}

/// sup over the far radii {2 + far_step, ..., r_max}. boundary_hit flags a
/// maximum on r_max that compact support does not explain; r_max is then too small.
inline MaximalResult maximal_far(const Dimension& dim, double alpha, const ScalarField& f, const HPoint& x,
                                 const RadiusGrid& grid, Engine engine, const McConfig& mc = {}) {
    grid.validate();
    detail::check_alpha(dim, alpha);
    return detail::scan_radii(dim, alpha, f, x, grid.far_radii(), 2.0, grid.r_max, engine, mc);
}

struct MaximalSplit {
    MaximalResult local;
    MaximalResult far;
    MaximalResult combined;
};

inline MaximalSplit maximal_split(const Dimension& dim, double alpha, const ScalarField& f, const HPoint& x,
                                  const RadiusGrid& grid, Engine engine, const McConfig& mc = {}) {
    MaximalSplit s;
    s.local = maximal_local(dim, alpha, f, x, grid, engine, mc);
    s.far = maximal_far(dim, alpha, f, x, grid, engine, mc);
    s.combined = s.far.value > s.local.value ? s.far : s.local;
    return s;
}

/// M_alpha f(x) on the grid: max of the local and far parts.
inline MaximalResult maximal(const Dimension& dim, double alpha, const ScalarField& f, const HPoint& x,
                             const RadiusGrid& grid, Engine engine, const McConfig& mc = {}) {
    return maximal_split(dim, alpha, f, x, grid, engine, mc).combined;
}

/// M_alpha f tabulated at the distances `t_nodes` (quadrature path, radial f);
/// linear in between.
inline RadialProfile maximal_profile(const Dimension& dim, double alpha, const RadialProfile& f,
                                     const RadiusGrid& grid, std::vector<double> t_nodes) {
    const auto field = ScalarField::radial(f);
    const std::vector<double> e1 = [&] {
        std::vector<double> e(dim.n(), 0.0);
        e[0] = 1.0;
        return e;
    }();
    return RadialProfile::tabulate(
        [&](double t) { return maximal(dim, alpha, field, radial_point(t, e1), grid, Engine::quad).value; },
        std::move(t_nodes), Interp::linear, RadialProfile::kUnbounded);
}

/// A_{r,alpha} f tabulated at the distances `t_nodes` for radial f; linear in between.
inline RadialProfile average_profile(const Dimension& dim, double alpha, const RadialProfile& f, double r,
                                     std::vector<double> t_nodes) {
    detail::check_alpha(dim, alpha);
    const double scale = detail::volume_factor(dim, alpha, r);
    const double support = f.compact() ? f.support_radius() + r : RadialProfile::kUnbounded;
    return RadialProfile::tabulate([&](double t) { return scale * detail::radial_mass(dim, f, t, r); },
                                   std::move(t_nodes), Interp::linear, support);
}

/// A_{r,alpha}(chi_E)(x). Radial unions and single balls are exact on the
/// quadrature path; an annulus cap is exact when its ball or x is centered at the origin.
inline McEstimate avg_indicator_estimate(const Dimension& dim, double alpha, const SetSpec& E, const HPoint& x,
                                         double r, Engine engine, const McConfig& mc = {}) {
    detail::check_alpha(dim, alpha);
    if (!(r > 0.0)) throw DomainError("avg_indicator: radius must be positive");
    const double scale = detail::volume_factor(dim, alpha, r);
    McEstimate out;
    if (E.is_empty()) {
        out.samples = engine == Engine::mc ? mc.samples : 0;
        return out;
    }
    if (engine == Engine::mc) {
        out = mc_integrate_ball(dim, x, r, [&E](const HPoint& y) { return E.contains(y) ? 1.0 : 0.0; }, mc);
        out.value *= scale;
        out.std_error *= scale;
        return out;
    }
    const double t = ScalarField::distance_from_origin(x);
    double mass = 0.0;
    if (E.is_radial()) {
        mass = detail::radial_mass(dim, E.indicator(), t, r);
    } else if (auto* b = std::get_if<BallAt>(&E.kind())) {
        mass = intersection_volume(dim, hdist(x, axis_point(dim, b->t)), r, b->rho);
    } else {
        const auto& c = std::get<AnnulusCap>(E.kind());
        const double lo = c.l.j - 1.0;
        const double hi = c.l.j;
        if (c.t == 0.0) {
            // C_l cap B(0, rho) is the shell (l-1, min(l, rho)]
            const double top = std::min(hi, c.rho);
            if (top > lo) mass = detail::radial_mass(dim, RadialProfile::shells({{lo, top}}), t, r);
        } else if (t == 0.0) {
            mass = radial_cap_integral(dim, c.t, c.rho, [r](double s) { return s <= r ? 1.0 : 0.0; }, lo, hi,
                                       std::vector<double>{r});
        } else {
            throw DomainError("avg_indicator: the quad engine needs x or the cap's ball at the origin");
        }
    }
    out.value = scale * mass;
    return out;
}

inline double avg_indicator(const Dimension& dim, double alpha, const SetSpec& E, const HPoint& x, double r,
                            Engine engine, const McConfig& mc = {}) {
    return avg_indicator_estimate(dim, alpha, E, x, r, engine, mc).value;
}

} // namespace hypmax
