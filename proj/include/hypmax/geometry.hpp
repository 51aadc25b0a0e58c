#pragma once

// Geometry and measure kernel of the hyperbolic space H^n in the hyperboloid
// model: points are (x0, x1, ..., xn) with x0^2 - sum xi^2 = 1 and x0 >= 1.

#include "hypmax/errors.hpp"
#include "hypmax/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace hypmax {

/// Dimension n >= 2 of H^n together with the area of the Euclidean unit sphere S^{n-1}.
class Dimension {
public:
    explicit Dimension(int n) : n_(n) {
        if (n < 2) throw DomainError("dimension must be at least 2, got " + std::to_string(n));
        omega_ = 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
    }

    int n() const noexcept { return n_; }
    double omega() const noexcept { return omega_; }

    friend bool operator==(const Dimension& a, const Dimension& b) { return a.n_ == b.n_; }

private:
    int n_;
    double omega_;
};

/// A point of H^n in Minkowski coordinates.
class HPoint {
public:
    static constexpr double kTolerance = 1e-10;

    /// Validates the hyperboloid constraint relative to the coordinate scale.
    explicit HPoint(std::vector<double> coords) : x_(std::move(coords)) {
        if (x_.size() < 3) throw InvalidPoint("a point of H^n needs at least 3 coordinates");
        double spatial = 0.0;
        for (std::size_t i = 1; i < x_.size(); ++i) spatial += x_[i] * x_[i];
        const double form = x_[0] * x_[0] - spatial;
        if (!(x_[0] >= 1.0 - kTolerance) ||
            std::abs(form - 1.0) > kTolerance * std::max(1.0, x_[0] * x_[0])) {
            throw InvalidPoint("coordinates are not on the upper hyperboloid sheet (x0^2 - |x|^2 = " +
                               std::to_string(form) + ")");
        }
    }

    static HPoint origin(const Dimension& dim) {
        std::vector<double> c(dim.n() + 1, 0.0);
        c[0] = 1.0;
        return HPoint(std::move(c), Unchecked{});
    }

    int dim() const noexcept { return static_cast<int>(x_.size()) - 1; }
    double operator[](std::size_t i) const { return x_[i]; }
    std::span<const double> coords() const noexcept { return x_; }

private:
    struct Unchecked {};
    HPoint(std::vector<double> coords, Unchecked) : x_(std::move(coords)) {}

    friend HPoint radial_point(double, std::span<const double>);
    friend HPoint translate_from_origin(const HPoint&, const HPoint&);

    std::vector<double> x_;
};

/// Minkowski bilinear form x0*y0 - sum_{i>=1} xi*yi.
inline double minkowski(const HPoint& x, const HPoint& y) {
    if (x.dim() != y.dim()) throw DomainError("points live in different dimensions");
    double s = x[0] * y[0];
    for (int i = 1; i <= x.dim(); ++i) s -= x[i] * y[i];
    return s;
}

/// Geodesic distance. Uses 2 asinh(|x - y|/2) near the diagonal, where arccosh loses digits.
inline double hdist(const HPoint& x, const HPoint& y) {
    const double inner = minkowski(x, y);
    const double scale = std::max({1.0, x[0] * x[0], y[0] * y[0]});
    if (inner < 1.0 - HPoint::kTolerance * scale) {
        throw InvalidPoint("Minkowski product below 1: " + std::to_string(inner));
    }
    if (inner > 2.0) return std::acosh(inner);
    double chord2 = -(x[0] - y[0]) * (x[0] - y[0]);
    for (int i = 1; i <= x.dim(); ++i) chord2 += (x[i] - y[i]) * (x[i] - y[i]);
    return 2.0 * std::asinh(0.5 * std::sqrt(std::max(0.0, chord2)));
}

/// The point at distance t from the origin along the unit direction `direction` (length n).
inline HPoint radial_point(double t, std::span<const double> direction) {
    if (!(t >= 0.0)) throw DomainError("radial_point: t must be nonnegative");
    double norm2 = 0.0;
    for (double d : direction) norm2 += d * d;
    if (direction.size() < 2 || std::abs(norm2 - 1.0) > 1e-10) {
        throw DomainError("radial_point: direction must be a unit vector in R^n, n >= 2");
    }
    std::vector<double> c(direction.size() + 1);
    c[0] = std::cosh(t);
    const double sh = std::sinh(t);
    for (std::size_t i = 0; i < direction.size(); ++i) c[i + 1] = sh * direction[i];
    return HPoint(std::move(c), HPoint::Unchecked{});
}

/// radial_point along the first axis e1.
inline HPoint axis_point(const Dimension& dim, double t) {
    std::vector<double> e(dim.n(), 0.0);
    e[0] = 1.0;
    return radial_point(t, e);
}

/// Image of x under the Minkowski boost that carries the origin to `center`.
/// Exact isometry; distances from the origin become distances from `center`.
inline HPoint translate_from_origin(const HPoint& center, const HPoint& x) {
    const int n = center.dim();
    if (x.dim() != n) throw DomainError("translate_from_origin: dimension mismatch");
    const double c0 = center[0];
    double cx = 0.0;
    for (int i = 1; i <= n; ++i) cx += center[i] * x[i];
    std::vector<double> y(n + 1);
    y[0] = c0 * x[0] + cx;
    const double k = x[0] + cx / (1.0 + c0);
    for (int i = 1; i <= n; ++i) y[i] = x[i] + center[i] * k;
    return HPoint(std::move(y), HPoint::Unchecked{});
}

/// log sinh(t) for t > 0 without overflow.
inline double log_sinh(double t) {
    if (t > 20.0) return t + std::log1p(-std::exp(-2.0 * t)) - std::numbers::ln2;
    return std::log(std::sinh(t));
}

/// Area of the geodesic sphere of radius s: Omega_n sinh^{n-1}(s).
inline double sphere_area(const Dimension& dim, double s) {
    return dim.omega() * std::pow(std::sinh(s), dim.n() - 1);
}

/// Integral of sinh^m over [0, r]. A 20-point Gauss rule is exact to rounding on
/// [0, 1]; beyond that the reduction
///   I_m = sinh^{m-1}(r) cosh(r) / m - (m-1)/m I_{m-2}
/// is used, which carries no cancellation once r >= 1.
inline double sinh_power_integral(int m, double r) {
    if (r <= 1.0) {
        using Rule = boost::math::quadrature::gauss<double, 20>;
        return Rule::integrate([m](double x) { return std::pow(std::sinh(x), m); }, 0.0, r);
    }
    const double sh = std::sinh(r);
    const double ch = std::cosh(r);
    double even = r;                             // I_0
    double odd = 2.0 * std::pow(std::sinh(0.5 * r), 2); // I_1 = cosh r - 1
    if (m == 0) return even;
    if (m == 1) return odd;
    double prev2 = (m % 2 == 0) ? even : odd;
    double shpow = (m % 2 == 0) ? sh : sh * sh; // sinh^{k-1} for the first k
    for (int k = (m % 2 == 0) ? 2 : 3; k <= m; k += 2) {
        prev2 = shpow * ch / k - (k - 1.0) / k * prev2;
        shpow *= sh * sh;
    }
    return prev2;
}

/// Volume of a geodesic ball of radius r: Omega_n * int_0^r sinh^{n-1}.
inline double ball_volume(const Dimension& dim, double r) {
    if (!(r >= 0.0)) throw DomainError("ball_volume: radius must be nonnegative");
    return dim.omega() * sinh_power_integral(dim.n() - 1, r);
}

/// log of ball_volume evaluated by adaptive quadrature. For r > 25 the integrand
/// is rescaled by sinh^{n-1}(r) so nothing overflows.
inline double log_ball_volume_quadrature(const Dimension& dim, double r) {
    if (!(r > 0.0)) throw DomainError("log_ball_volume_quadrature: radius must be positive");
    const int m = dim.n() - 1;
    const QuadTolerance tol{1e-300, 1e-12, 4000};
    if (r <= 25.0) {
        auto res = integrate_adaptive([m](double t) { return std::pow(std::sinh(t), m); }, 0.0, r, tol);
        return std::log(dim.omega()) + std::log(require_converged(res, "ball volume"));
    }
    const double top = log_sinh(r);
    auto scaled = [m, top](double t) { return t > 0.0 ? std::exp(m * (log_sinh(t) - top)) : 0.0; };
    std::vector<double> pts;
    for (double a = r; a > 0.0; a -= 1.0) pts.push_back(a);
    auto res = integrate_piecewise(scaled, make_breakpoints(pts, 0.0, r), tol);
    return std::log(dim.omega()) + m * top + std::log(require_converged(res, "ball volume"));
}

/// ball_volume computed by adaptive quadrature (the reference route).
inline double ball_volume_quadrature(const Dimension& dim, double r) {
    if (r == 0.0) return 0.0;
    return std::exp(log_ball_volume_quadrature(dim, r));
}

/// Ratio of the ball volume to the comparison profile (r^n / (1 + r^n)) e^{(n-1) r}.
inline std::vector<double> growth_bracket(const Dimension& dim, std::span<const double> radii) {
    std::vector<double> out;
    out.reserve(radii.size());
    const int n = dim.n();
    for (double r : radii) {
        if (!(r > 0.0)) throw DomainError("growth_bracket: radii must be positive");
        const double log_cmp = n * std::log(r) - std::log1p(std::pow(r, n)) + (n - 1) * r;
        const double vol = ball_volume(dim, r);
        const double log_vol = std::isfinite(vol) ? std::log(vol) : log_ball_volume_quadrature(dim, r);
        out.push_back(std::exp(log_vol - log_cmp));
    }
    return out;
}

/// Fraction of the geodesic sphere S(0, s) lying inside B(x, r) where t = d(0, x).
///
/// The cap half-angle phi0 satisfies the hyperbolic law of cosines; it is
/// evaluated through the half-angle products
///   sin^2(phi0/2) ~ sinh((r+t-s)/2) sinh((r-t+s)/2)
///   cos^2(phi0/2) ~ sinh((t+s+r)/2) sinh((t+s-r)/2)
/// which stay accurate when phi0 is tiny. The normalized cap area of S^{n-1}
/// is the regularized incomplete beta I_{sin^2(phi0/2)}((n-1)/2, (n-1)/2).
inline double cap_fraction(const Dimension& dim, double s, double t, double r) {
    if (r >= t + s) return 1.0;
    if (r <= std::abs(t - s)) return 0.0;
    const double a = std::sinh(0.5 * (r + t - s)) * std::sinh(0.5 * (r - t + s));
    const double b = std::sinh(0.5 * (t + s + r)) * std::sinh(0.5 * (t + s - r));
    const double x = std::clamp(a / (a + b), 0.0, 1.0);
    switch (dim.n()) {
    case 2:
        return 2.0 * std::atan2(std::sqrt(a), std::sqrt(b)) / std::numbers::pi;
    case 3:
        return x;
    default: {
        const double h = 0.5 * (dim.n() - 1);
        return boost::math::ibeta(h, h, x);
    }
    }
}

/// Index j of the annulus C_j = {x : j-1 < d(0,x) <= j}; C_1 excludes the origin.
struct AnnulusIndex {
    int j;
};

inline AnnulusIndex annulus_of_distance(double d) {
    if (!(d > 0.0)) throw DomainError("annulus_of: the origin belongs to no annulus");
    // distances within 1e-12 of an integer are treated as lying on that integer
    return {std::max(1, static_cast<int>(std::ceil(d - 1e-12)))};
}

inline AnnulusIndex annulus_of(const HPoint& x) {
    return annulus_of_distance(hdist(HPoint::origin(Dimension(x.dim())), x));
}

/// A geodesic ball.
struct BallSpec {
    HPoint center;
    double radius;

    BallSpec(HPoint c, double r) : center(std::move(c)), radius(r) {
        if (!(r > 0.0)) throw DomainError("ball radius must be positive");
    }
};

} // namespace hypmax
