#pragma once

// Globally adaptive Gauss-Kronrod quadrature on top of Boost's G10/K21 rule.
// Intervals are kept in a max-heap keyed by their error estimate; the worst
// one is bisected until the summed error meets max(abs, rel * |value|).

#include "hypmax/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <vector>

namespace hypmax {

struct QuadTolerance {
    double abs = 1e-10;
    double rel = 1e-9;
    int max_intervals = 4000;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
    bool converged = true;
};

namespace detail {

struct QuadPiece {
    double a, b, value, error;
    bool operator<(const QuadPiece& o) const { return error < o.error; }
};

template <class F>
QuadPiece gk21(F& f, double a, double b) {
    using Rule = boost::math::quadrature::gauss_kronrod<double, 21>;
    double err = 0.0;
    auto ref = [&f](double x) -> double { return f(x); };
    double value = Rule::integrate(ref, a, b, 0, 0.0, &err);
    // Boost reports |K - G| on the reference interval [-1, 1]; rescale to [a, b]
    return {a, b, value, err * 0.5 * (b - a)};
}

} // namespace detail

/// Integrates f over the sorted breakpoints `points` (at least two entries).
/// Discontinuities and kinks of f should be listed as breakpoints.
template <class F>
QuadResult integrate_piecewise(F&& f, std::span<const double> points, QuadTolerance tol = {}) {
    QuadResult out;
    if (points.size() < 2) return out;

    std::vector<detail::QuadPiece> heap;
    heap.reserve(64);
    double value = 0.0;
    double error = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (!(points[i + 1] > points[i])) continue;
        auto piece = detail::gk21(f, points[i], points[i + 1]);
        value += piece.value;
        error += piece.error;
        heap.push_back(piece);
    }
    std::make_heap(heap.begin(), heap.end());

    auto target = [&] { return std::max(tol.abs, tol.rel * std::abs(value)); };
    while (error > target() && static_cast<int>(heap.size()) < tol.max_intervals) {
        std::pop_heap(heap.begin(), heap.end());
        auto worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // interval exhausted at machine resolution; keep it and stop refining it
            heap.push_back({worst.a, worst.b, worst.value, 0.0});
            std::push_heap(heap.begin(), heap.end());
            error -= worst.error;
            continue;
        }
        auto left = detail::gk21(f, worst.a, mid);
        auto right = detail::gk21(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end());
    }

    // re-sum to shed the drift of the running updates
    value = 0.0;
    error = 0.0;
    for (const auto& p : heap) {
        value += p.value;
        error += p.error;
    }
    out.value = value;
    out.error = error;
    out.intervals = static_cast<int>(heap.size());
    out.converged = error <= target();
    return out;
}

template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, QuadTolerance tol = {}) {
    const double pts[2] = {a, b};
    return integrate_piecewise(std::forward<F>(f), std::span<const double>(pts, 2), tol);
}

/// Throws NumericalError carrying the achieved error when the result did not converge.
inline double require_converged(const QuadResult& r, const char* what) {
    if (!std::isfinite(r.value)) {
        throw NumericalError(std::string(what) + ": non-finite quadrature value");
    }
    if (!r.converged) {
        std::ostringstream os;
        os << what << ": quadrature did not converge (value " << r.value << ", error estimate "
           << r.error << ", " << r.intervals << " intervals)";
        throw NumericalError(os.str(), {r.value, r.error});
    }
    return r.value;
}

/// Sorts, clips to [lo, hi] and de-duplicates a breakpoint list; lo and hi are always included.
inline std::vector<double> make_breakpoints(std::vector<double> pts, double lo, double hi) {
    pts.push_back(lo);
    pts.push_back(hi);
    std::erase_if(pts, [&](double x) { return !(x >= lo && x <= hi) || !std::isfinite(x); });
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

} // namespace hypmax
