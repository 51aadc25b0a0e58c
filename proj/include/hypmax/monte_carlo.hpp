#pragma once

// Seeded Monte Carlo on H^n. Samples are indexed by a counter; work is cut
// into fixed-size chunks whose partial statistics are merged in chunk order,
// so results are bit-identical for any worker count.

#include "hypmax/errors.hpp"
#include "hypmax/geometry.hpp"
#include "hypmax/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace hypmax {

struct McConfig {
    std::uint64_t seed = 20240501;
    std::uint64_t samples = 100000;
    unsigned workers = 1;
    /// Requested bound on the standard error relative to |value|; 0 disables the check.
    double rel_tolerance = 0.0;
};

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
    /// False when McConfig::rel_tolerance was set and the standard error exceeds it.
    bool tolerance_met = true;
};

namespace detail {

inline constexpr std::uint64_t kChunk = 2048;

/// Running mean / second moment (Welford), merged with Chan's formula.
struct Moments {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    void merge(const Moments& o) noexcept {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double n = static_cast<double>(count + o.count);
        const double delta = o.mean - mean;
        mean += delta * static_cast<double>(o.count) / n;
        m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) / n;
        count += o.count;
    }
};

/// Runs body(chunk_index) for every chunk on up to `workers` threads.
inline void for_each_chunk(std::uint64_t chunks, unsigned workers, const std::function<void(std::uint64_t)>& body) {
    const unsigned threads = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, workers), chunks));
    if (threads <= 1) {
        for (std::uint64_t c = 0; c < chunks; ++c) body(c);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::uint64_t c = next++; c < chunks && !failed; c = next++) {
                try {
                    body(c);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

/// Evaluates f(i) for i in [0, count) and reduces the moments in index order.
template <class F>
Moments reduce_moments(std::uint64_t count, unsigned workers, F&& f) {
    const std::uint64_t chunks = (count + kChunk - 1) / kChunk;
    std::vector<Moments> parts(chunks);
    for_each_chunk(chunks, workers, [&](std::uint64_t c) {
        Moments m;
        const std::uint64_t end = std::min(count, (c + 1) * kChunk);
        for (std::uint64_t i = c * kChunk; i < end; ++i) m.add(f(i));
        parts[c] = m;
    });
    Moments total;
    for (const auto& m : parts) total.merge(m);
    return total;
}

} // namespace detail

/// Inverse of the radial distribution of the uniform law on B(0, r): returns rho
/// with V(rho) = u V(r). Closed form for n = 2, safeguarded Newton on log V otherwise.
inline double radial_quantile(const Dimension& dim, double r, double u) {
    if (dim.n() == 2) {
        // cosh(rho) - 1 = u (cosh r - 1), written with half-angle sinh for accuracy
        return 2.0 * std::asinh(std::sqrt(u) * std::sinh(0.5 * r));
    }
    const double target = std::log(u) + std::log(ball_volume(dim, r));
    double lo = 0.0;
    double hi = r;
    // small-ball start V ~ Omega rho^n / n, capped to the bracket
    double rho = std::min(r * std::pow(u, 1.0 / dim.n()), r);
    for (int it = 0; it < 100; ++it) {
        const double vol = ball_volume(dim, rho);
        const double f = std::log(vol) - target;
        if (f > 0.0) hi = rho; else lo = rho;
        const double slope = sphere_area(dim, rho) / vol;
        double next = rho - f / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - rho) <= 1e-13 * std::max(1.0, rho) || hi - lo <= 1e-14 * std::max(1.0, hi)) {
            return next;
        }
        rho = next;
    }
    return rho;
}

/// Uniform (w.r.t. mu_n) random access sampler of a ball. Sample i depends only
/// on (seed, i): radius from the radial quantile, direction from normalized
/// Gaussians, then a Minkowski boost to the center.
class BallSampler {
public:
    BallSampler(const Dimension& dim, HPoint center, double radius, std::uint64_t seed)
        : dim_(dim), center_(std::move(center)), radius_(radius), uniforms_(seed, 1),
          at_origin_(center_[0] == 1.0) {
        if (!(radius > 0.0)) throw DomainError("BallSampler: radius must be positive");
        if (center_.dim() != dim.n()) throw DomainError("BallSampler: center dimension mismatch");
    }

    /// Distance from the center of sample i.
    double radius_of(std::uint64_t i) const { return radial_quantile(dim_, radius_, uniforms_.uniform(i, 0)); }

    HPoint operator()(std::uint64_t i) const {
        const int n = dim_.n();
        const double rho = radius_of(i);
        std::vector<double> dir(n);
        double norm2 = 0.0;
        for (int k = 0; k < n; ++k) {
            dir[k] = uniforms_.normal(i, 1 + static_cast<std::uint32_t>(k / 2), k % 2 == 1);
            norm2 += dir[k] * dir[k];
        }
        if (norm2 == 0.0) {
            dir[0] = 1.0;
            norm2 = 1.0;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& d : dir) d *= inv;
        HPoint local = radial_point(rho, dir);
        return at_origin_ ? local : translate_from_origin(center_, local);
    }

    const Dimension& dimension() const noexcept { return dim_; }
    const HPoint& center() const noexcept { return center_; }
    double radius() const noexcept { return radius_; }

private:
    Dimension dim_;
    HPoint center_;
    double radius_;
    CounterUniforms uniforms_;
    bool at_origin_;
};

/// The first `count` samples of the ball stream, in index order.
inline std::vector<HPoint> sample_ball_uniform(const Dimension& dim, const HPoint& center, double r,
                                               const McConfig& mc) {
    BallSampler sampler(dim, center, r, mc.seed);
    std::vector<HPoint> out;
    out.reserve(mc.samples);
    for (std::uint64_t i = 0; i < mc.samples; ++i) out.push_back(sampler(i));
    return out;
}

/// Finalizes moments of f over a region of measure `volume` into an estimate of its integral.
inline McEstimate make_estimate(const detail::Moments& m, double volume, const McConfig& mc) {
    McEstimate est;
    est.samples = m.count;
    est.value = m.mean * volume;
    est.std_error = m.count > 1 ? std::sqrt(m.m2 / static_cast<double>(m.count - 1) / static_cast<double>(m.count)) * volume
                              : 0.0;
    if (mc.rel_tolerance > 0.0) est.tolerance_met = est.std_error <= mc.rel_tolerance * std::abs(est.value);
    return est;
}

/// Monte Carlo estimate of the integral of `integrand` over B(center, r).
/// A non-finite integrand value raises NumericalError carrying the point.
template <class F>
McEstimate mc_integrate_ball(const Dimension& dim, const HPoint& center, double r, F&& integrand, const McConfig& mc) {
    if (mc.samples == 0) throw DomainError("McConfig.samples must be positive");
    BallSampler sampler(dim, center, r, mc.seed);
    auto moments = detail::reduce_moments(mc.samples, mc.workers, [&](std::uint64_t i) {
        HPoint x = sampler(i);
        const double v = integrand(x);
        if (!std::isfinite(v)) {
            auto c = x.coords();
            throw NumericalError("mc_integrate_ball: integrand is not finite", {c.begin(), c.end()});
        }
        return v;
    });
    return make_estimate(moments, ball_volume(dim, r), mc);
}

/// mu(B(x,r) cap B(y,s)) / e^{(n-1)(r+s-d(x,y))/2}. The numerator is sampled in
/// the smaller ball; it is exact for disjoint balls and for x = y, r = s.
inline McEstimate intersection_bound_ratio(const Dimension& dim, const HPoint& x, double r, const HPoint& y, double s,
                                           const McConfig& mc) {
    if (!(r > 0.0) || !(s > 0.0)) throw DomainError("intersection_bound_ratio: radii must be positive");
    const double d = hdist(x, y);
    const double denom = std::exp((dim.n() - 1) * (r + s - d) / 2.0);
    McEstimate est;
    if (d >= r + s) {
        est.samples = mc.samples;
        return est;
    }
    if (d == 0.0 && r == s) {
        est.value = ball_volume(dim, r) / denom;
        est.samples = mc.samples;
        return est;
    }
    const bool x_small = r <= s;
    const HPoint& c = x_small ? x : y;
    const HPoint& o = x_small ? y : x;
    const double big = x_small ? s : r;
    est = mc_integrate_ball(dim, c, std::min(r, s), [&](const HPoint& z) { return hdist(o, z) <= big ? 1.0 : 0.0; }, mc);
    est.value /= denom;
    est.std_error /= denom;
    if (mc.rel_tolerance > 0.0) est.tolerance_met = est.std_error <= mc.rel_tolerance * std::abs(est.value);
    return est;
}

} // namespace hypmax
