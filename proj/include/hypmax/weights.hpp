#pragma once

// Radial weights and the weight conditions: local A_{p,q} products, the
// global A_{p,q} scan, the annulus conditions on w^q(C_l cap B(x, r)), the
// testing condition on pairs of sets, and the (beta, gamma) parameter maps.

#include "hypmax/field.hpp"
#include "hypmax/monte_carlo.hpp"
#include "hypmax/operators.hpp"
#include "hypmax/radial.hpp"
#include "hypmax/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace hypmax {

/// (n, alpha, p, q) with 1/q = 1/p - alpha/n.
struct ExponentTriple {
    int n = 2;
    double alpha = 1.0;
    double p = 4.0 / 3.0;
    double q = 4.0;

    ExponentTriple() = default;
    ExponentTriple(int n_, double alpha_, double p_, double q_) : n(n_), alpha(alpha_), p(p_), q(q_) { validate(); }

    /// The triple with q determined by n, alpha and p.
    static ExponentTriple from_p(int n, double alpha, double p) {
        const double inv_q = 1.0 / p - alpha / n;
        if (!(inv_q > 0.0)) throw RangeError("ExponentTriple: need p < n/alpha");
        return {n, alpha, p, 1.0 / inv_q};
    }

    void validate() const {
        if (n < 2) throw RangeError("ExponentTriple: n must be at least 2");
        if (!(alpha > 0.0 && alpha < n)) throw RangeError("ExponentTriple: alpha must lie in (0, n)");
        if (!(p >= 1.0 && p < n / alpha)) throw RangeError("ExponentTriple: p must lie in [1, n/alpha)");
        if (!(std::abs(1.0 / q - (1.0 / p - alpha / n)) <= 1e-12)) {
            throw RangeError("ExponentTriple: 1/q must equal 1/p - alpha/n");
        }
        if (!(q > p)) throw RangeError("ExponentTriple: q must exceed p");
    }

    Dimension dim() const { return Dimension(n); }
    /// Conjugate exponent p' (infinite for p = 1).
    double p_prime() const { return p == 1.0 ? std::numeric_limits<double>::infinity() : p / (p - 1.0); }
    double one_minus() const { return 1.0 - alpha / n; }
    /// min{p, q/p + p - p/(1 - alpha/n)}: the upper bound for delta in the first annulus condition.
    double delta_bound() const { return std::min(p, q / p + p - p / one_minus()); }
};

/// A radial weight. power_volume is w_theta(x) = [1 + mu(B(0, d(0,x)))]^{-theta/q}.
class WeightSpec {
public:
    enum class Kind { power_volume, radial_table, constant };

    static WeightSpec power_volume(const Dimension& dim, double theta, double q) {
        if (!(q > 0.0)) throw DomainError("power_volume weight: q must be positive");
        WeightSpec w(Kind::power_volume, dim);
        w.theta_ = theta;
        w.q_ = q;
        return w;
    }

    /// A tabulated weight; values must be nonnegative (zeros are allowed so
    /// that non-integrable w^{-p'} can be exercised).
    static WeightSpec radial_table(const Dimension& dim, RadialProfile table) {
        for (double v : table.values()) {
            if (v < 0.0) throw DomainError("radial_table weight: values must be nonnegative");
        }
        if (table.compact()) throw DomainError("radial_table weight: a weight cannot have compact support");
        WeightSpec w(Kind::radial_table, dim);
        w.table_ = std::make_shared<RadialProfile>(std::move(table));
        return w;
    }

    static WeightSpec constant(const Dimension& dim, double c) {
        if (!(c > 0.0)) throw DomainError("constant weight: c must be positive");
        WeightSpec w(Kind::constant, dim);
        w.c_ = c;
        return w;
    }

    Kind kind() const noexcept { return kind_; }
    const Dimension& dimension() const noexcept { return dim_; }
    double theta() const noexcept { return theta_; }
    double q() const noexcept { return q_; }

    /// w^e at distance t from the origin; a zero weight raised to e < 0 is +inf.
    double pow_at(double t, double e) const {
        switch (kind_) {
        case Kind::power_volume:
            return std::exp(-theta_ * e / q_ * std::log1p(ball_volume(dim_, t)));
        case Kind::constant:
            return std::pow(c_, e);
        case Kind::radial_table: {
            const double v = (*table_)(t);
            if (e == 0.0) return 1.0;
            if (v == 0.0) return e > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
            return std::pow(v, e);
        }
        }
        return 0.0;
    }

    double at(double t) const { return pow_at(t, 1.0); }
    double operator()(const HPoint& x) const { return at(ScalarField::distance_from_origin(x)); }

    std::vector<double> breakpoints() const { return table_ ? table_->breakpoints() : std::vector<double>{}; }

    /// Minimum of w over [lo, hi].
    double min_on(double lo, double hi) const {
        if (kind_ == Kind::constant) return c_;
        if (kind_ == Kind::power_volume) return std::min(at(lo), at(hi));
        std::vector<double> pts{lo, hi};
        for (double b : table_->nodes()) {
            if (b > lo && b < hi) pts.push_back(b);
        }
        std::sort(pts.begin(), pts.end());
        const std::size_t m = pts.size();
        for (std::size_t i = 0; i + 1 < m; ++i) pts.push_back(0.5 * (pts[i] + pts[i + 1]));
        double best = std::numeric_limits<double>::infinity();
        for (double s : pts) best = std::min(best, at(s));
        return best;
    }

    /// int over the shell a < d(0,.) <= b of w^e dmu. Exact for power_volume
    /// (substituting v = mu(B(0, s))) and constant weights.
    double shell_measure(double e, double a, double b) const {
        a = std::max(a, 0.0);
        if (!(b > a)) return 0.0;
        if (kind_ == Kind::constant) return std::pow(c_, e) * (ball_volume(dim_, b) - ball_volume(dim_, a));
        if (kind_ == Kind::power_volume) {
            const double m = theta_ * e / q_;
            // F(v) = ((1+v)^{1-m} - 1)/(1-m), log(1+v) when m = 1
            auto F = [m](double v) {
                const double l = std::log1p(v);
                if (std::abs(1.0 - m) < 1e-12) return l;
                return std::expm1((1.0 - m) * l) / (1.0 - m);
            };
            return F(ball_volume(dim_, b)) - F(ball_volume(dim_, a));
        }
        if (min_on(a, b) == 0.0 && e < 0.0) return std::numeric_limits<double>::infinity();
        const auto breaks = breakpoints();
        return radial_shell_integral(dim_, [this, e](double s) { return pow_at(s, e); }, a, b, breaks);
    }

    /// int over B(x, r) cap {lo < d(0,.) <= hi} of w^e dmu with t = d(0, x).
    double ball_measure(double e, double t, double r, double lo = 0.0,
                        double hi = std::numeric_limits<double>::infinity()) const {
        if (t == 0.0) return shell_measure(e, lo, std::min(hi, r));
        const double a = std::max({lo, 0.0, t - r});
        const double b = std::min(hi, t + r);
        if (!(b > a)) return 0.0;
        if (e < 0.0 && min_on(a, b) == 0.0) return std::numeric_limits<double>::infinity();
        const auto breaks = breakpoints();
        return radial_cap_integral(dim_, t, r, [this, e](double s) { return pow_at(s, e); }, lo, hi, breaks);
    }

private:
    WeightSpec(Kind k, const Dimension& dim) : kind_(k), dim_(dim) {}

    Kind kind_;
    Dimension dim_;
    double theta_ = 0.0;
    double q_ = 1.0;
    double c_ = 1.0;
    std::shared_ptr<const RadialProfile> table_;
};

/// w^e(S) for a set of the constructible family.
inline double set_measure(const WeightSpec& w, double e, const SetSpec& S) {
    if (auto* u = std::get_if<RadialUnion>(&S.kind())) {
        double total = 0.0;
        for (auto [a, b] : u->shells) total += w.shell_measure(e, a, b);
        return total;
    }
    if (auto* b = std::get_if<BallAt>(&S.kind())) return w.ball_measure(e, b->t, b->rho);
    const auto& c = std::get<AnnulusCap>(S.kind());
    return w.ball_measure(e, c.t, c.rho, c.l.j - 1.0, c.l.j);
}

struct BetaGamma {
    double beta;
    double gamma;
};

/// beta = p/((1 - alpha/n)(q/p + p - delta)), gamma = q/(q/p + p - delta).
inline BetaGamma params_from_delta(const ExponentTriple& tr, double delta) {
    if (!(delta < tr.delta_bound())) {
        throw RangeError("params_from_delta: delta must be below min{p, q/p + p - p/(1 - alpha/n)} = " +
                         std::to_string(tr.delta_bound()));
    }
    const double d = tr.q / tr.p + tr.p - delta;
    return {tr.p / (tr.one_minus() * d), tr.q / d};
}

/// beta = gamma = q/(q + 1 - delta).
inline BetaGamma params_weak_only(const ExponentTriple& tr, double delta) {
    if (!(delta < 1.0)) throw RangeError("params_weak_only: delta must be below 1");
    const double b = tr.q / (tr.q + 1.0 - delta);
    return {b, b};
}

/// Half-open interval [lo, hi).
struct Window {
    double lo;
    double hi;
    bool contains(double x) const { return x >= lo && x < hi; }
    bool empty() const { return !(hi > lo); }
};

struct ThetaWindows {
    /// theta for which w_theta satisfies the first annulus condition with delta = theta.
    Window strong;
    /// theta for which w_theta satisfies the second annulus condition with delta = theta.
    Window weak;
};

inline ThetaWindows theta_windows(const ExponentTriple& tr) {
    const double pp = tr.p_prime();
    const double weak_lo = std::isfinite(pp) ? -tr.q / pp : 0.0;
    return {{1.0 - tr.p, tr.delta_bound()}, {weak_lo, 1.0}};
}

enum class Verdict { bounded, diverging, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::bounded: return "bounded";
    case Verdict::diverging: return "diverging";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

using Witness = std::vector<std::pair<std::string, double>>;

struct ConditionReport {
    double sup_ratio = 0.0;
    Witness witness;
    std::uint64_t samples = 0;
    Verdict verdict = Verdict::inconclusive;
    /// sup over the doubled family divided by sup over the base family, minus 1.
    double growth = 0.0;
    double std_error = 0.0;
};

/// Stabilization rule: bounded when doubling the family grows the sup by less than 5%.
inline constexpr double kStableGrowth = 0.05;

inline Verdict stabilization_verdict(double base_sup, double doubled_sup) {
    if (!std::isfinite(doubled_sup)) return Verdict::diverging;
    if (doubled_sup == 0.0 || doubled_sup <= (1.0 + kStableGrowth) * base_sup) return Verdict::bounded;
    return Verdict::inconclusive;
}

inline double stabilization_growth(double base_sup, double doubled_sup) {
    if (doubled_sup == 0.0) return 0.0;
    if (base_sup == 0.0) return std::numeric_limits<double>::infinity();
    return doubled_sup / base_sup - 1.0;
}

namespace detail {

inline void check_weight_dim(const WeightSpec& w, const ExponentTriple& tr) {
    if (w.dimension().n() != tr.n) throw DomainError("weight and exponent triple use different dimensions");
}

/// The local A_{p,q} product on B(x, r) with t = d(0, x); +inf when w^{-p'} is not integrable.
inline double apq_product(const WeightSpec& w, const ExponentTriple& tr, double t, double r) {
    const Dimension& dim = w.dimension();
    const double vol = ball_volume(dim, r);
    const double avg_q = w.ball_measure(tr.q, t, r) / vol;
    if (tr.p == 1.0) {
        const double m = w.min_on(std::max(0.0, t - r), t + r);
        return m == 0.0 ? std::numeric_limits<double>::infinity() : avg_q * std::pow(m, -tr.q);
    }
    const double pp = tr.p_prime();
    const double avg_m = w.ball_measure(-pp, t, r) / vol;
    return avg_q * std::pow(avg_m, tr.q / pp);
}

} // namespace detail

/// sup over the given balls (radius <= 2) of the local A_{p,q} product, or the
/// A_{1,q} form with the essential sup of w^{-1} when p = 1. The verdict
/// compares the sup over the first half of the list with the sup over all of it.
inline ConditionReport apq_loc_sup(const WeightSpec& w, const ExponentTriple& tr, std::span<const BallSpec> balls) {
    detail::check_weight_dim(w, tr);
    ConditionReport rep;
    const std::size_t half = (balls.size() + 1) / 2;
    double base = 0.0;
    for (std::size_t i = 0; i < balls.size(); ++i) {
        const auto& b = balls[i];
        if (!(b.radius > 0.0 && b.radius <= 2.0)) throw DomainError("apq_loc_sup: ball radii must lie in (0, 2]");
        const double t = ScalarField::distance_from_origin(b.center);
        const double v = detail::apq_product(w, tr, t, b.radius);
        ++rep.samples;
        if (v > rep.sup_ratio || !std::isfinite(v)) {
            rep.sup_ratio = v;
            rep.witness = {{"t", t}, {"r", b.radius}};
        }
        if (i + 1 == half) base = rep.sup_ratio;
        if (!std::isfinite(v)) break;
    }
    rep.growth = stabilization_growth(base, rep.sup_ratio);
    rep.verdict = stabilization_verdict(base, rep.sup_ratio);
    return rep;
}

/// Balls B(x, r) with x on the first axis: the grid t in {0, t_step, ..., t_max},
/// r in {r_step, ..., 2}, followed by the same number of balls shifted to
/// (t + t_step/2, r - r_step/2). For radial weights the product depends on
/// (t, r) only, so the second half doubles the resolution in both directions.
inline std::vector<BallSpec> local_ball_grid(const Dimension& dim, double t_max, double t_step = 0.25,
                                             double r_step = 0.1) {
    if (!(t_max >= 0.0 && t_step > 0.0 && r_step > 0.0 && r_step <= 2.0)) {
        throw DomainError("local_ball_grid: bad grid");
    }
    const int nt = static_cast<int>(std::floor(t_max / t_step + 1e-9));
    const int nr = static_cast<int>(std::floor(2.0 / r_step + 1e-9));
    std::vector<BallSpec> out;
    for (double shift : {0.0, 0.5}) {
        for (int i = 0; i <= nt; ++i) {
            for (int k = 1; k <= nr; ++k) {
                out.emplace_back(axis_point(dim, (i + shift) * t_step), (k - shift) * r_step);
            }
        }
    }
    return out;
}

/// The A_{p,q} product on balls of radius R: on the centered ball and the sup
/// over balls B(x, R) with d(0, x) = f R for the listed offset fractions f.
struct GlobalScanRow {
    double R;
    double centered;
    double sup_product;
    double best_offset;
};

inline constexpr double kGlobalScanOffsets[] = {0.0, 0.25, 0.5, 0.75, 1.0};

inline std::vector<GlobalScanRow> apq_global_scan(const WeightSpec& w, const ExponentTriple& tr,
                                                  std::span<const double> R_list,
                                                  std::span<const double> offsets = kGlobalScanOffsets) {
    detail::check_weight_dim(w, tr);
    if (tr.p == 1.0) throw DomainError("apq_global_scan: needs p > 1");
    std::vector<GlobalScanRow> out;
    double prev = 0.0;
    for (double R : R_list) {
        if (!(R > prev)) throw DomainError("apq_global_scan: R_list must be positive and increasing");
        prev = R;
        GlobalScanRow row{R, detail::apq_product(w, tr, 0.0, R), 0.0, 0.0};
        for (double f : offsets) {
            const double v = detail::apq_product(w, tr, f * R, R);
            if (v > row.sup_product) {
                row.sup_product = v;
                row.best_offset = f * R;
            }
        }
        out.push_back(row);
    }
    return out;
}

/// diverging: strictly increasing and last/first >= 10; bounded: all within 5% of the first.
inline Verdict global_scan_verdict(const std::vector<GlobalScanRow>& rows) {
    if (rows.empty()) return Verdict::inconclusive;
    bool increasing = true;
    double lo = rows.front().sup_product;
    double hi = lo;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        increasing = increasing && rows[i].sup_product > rows[i - 1].sup_product;
        lo = std::min(lo, rows[i].sup_product);
        hi = std::max(hi, rows[i].sup_product);
    }
    if (increasing && rows.size() > 1 && rows.back().sup_product >= 10.0 * rows.front().sup_product) {
        return Verdict::diverging;
    }
    if (hi <= (1.0 + kStableGrowth) * lo) return Verdict::bounded;
    return Verdict::inconclusive;
}

/// Grid for the annulus conditions: j, l <= j_max, r <= r_max, |l - j| <= r, and
/// `samples` distances per annulus C_j: the two ends of its closure [j-1, j]
/// (the ratio is continuous in d(0,x), so its essential sup over C_j is a max
/// over the closure) followed by seeded interior points. Sample k of C_j does
/// not depend on the grid size, so a doubled grid contains the base grid.
struct AnnulusGrid {
    int j_max = 12;
    int r_max = 12;
    int samples = 5;
    std::uint64_t seed = 20240501;

    AnnulusGrid doubled() const { return {2 * j_max, 2 * r_max, 2 * samples, seed}; }
};

namespace detail {

struct AnnulusSup {
    double sup = 0.0;
    Witness witness;
    std::uint64_t cells = 0;
};

/// sup of w^q(C_l cap B(x, r)) / [e^{(n-1)(r+l-j)/2 (lead - delta)} e^{(n-1) r delta} w(x)^q].
inline AnnulusSup annulus_sup(const WeightSpec& w, const ExponentTriple& tr, double lead, double delta,
                              const AnnulusGrid& g) {
    const int n1 = w.dimension().n() - 1;
    CounterUniforms u(g.seed, 3);
    AnnulusSup out;
    for (int j = 1; j <= g.j_max; ++j) {
        for (int k = 0; k < g.samples; ++k) {
            const double t = k == 0   ? j - 1.0
                             : k == 1 ? double(j)
                                      : j - u.uniform(static_cast<std::uint64_t>(j), static_cast<std::uint32_t>(k));
            const double log_wx = tr.q * std::log(w.at(t));
            for (int l = 1; l <= g.j_max; ++l) {
                for (int r = std::max(1, std::abs(l - j)); r <= g.r_max; ++r) {
                    ++out.cells;
                    const double lhs = w.ball_measure(tr.q, t, r, l - 1.0, l);
                    if (lhs == 0.0) continue;
                    const double log_rhs = n1 * (0.5 * (r + l - j) * (lead - delta) + r * delta) + log_wx;
                    const double ratio = std::exp(std::log(lhs) - log_rhs);
                    if (ratio > out.sup) {
                        out.sup = ratio;
                        out.witness = {{"j", double(j)}, {"l", double(l)}, {"r", double(r)}, {"t", t}};
                    }
                }
            }
        }
    }
    return out;
}

inline ConditionReport annulus_report(const WeightSpec& w, const ExponentTriple& tr, double lead, double delta,
                                      const AnnulusGrid& g) {
    const auto base = annulus_sup(w, tr, lead, delta, g);
    const auto big = annulus_sup(w, tr, lead, delta, g.doubled());
    ConditionReport rep;
    rep.sup_ratio = base.sup;
    rep.witness = base.witness;
    rep.samples = base.cells;
    rep.growth = stabilization_growth(base.sup, big.sup);
    rep.verdict = stabilization_verdict(base.sup, big.sup);
    return rep;
}

} // namespace detail

/// w^q(C_l cap B(x,r)) <~ e^{(n-1)(r+l-j)/2 (p - delta)} e^{(n-1) r delta} w(x)^q for x in C_j.
inline ConditionReport cond_cj_check(const WeightSpec& w, const ExponentTriple& tr, double delta,
                                     const AnnulusGrid& grid = {}) {
    detail::check_weight_dim(w, tr);
    if (!(delta < tr.delta_bound())) {
        throw RangeError("cond_cj_check: delta must be below min{p, q/p + p - p/(1 - alpha/n)} = " +
                         std::to_string(tr.delta_bound()));
    }
    return detail::annulus_report(w, tr, tr.p, delta, grid);
}

/// Same with the exponent q(1 - alpha/n) - delta in place of p - delta; delta < 1.
inline ConditionReport cond_cj2_check(const WeightSpec& w, const ExponentTriple& tr, double delta,
                                      const AnnulusGrid& grid = {}) {
    detail::check_weight_dim(w, tr);
    if (!(delta < 1.0)) throw RangeError("cond_cj2_check: delta must be below 1");
    return detail::annulus_report(w, tr, tr.q * tr.one_minus(), delta, grid);
}

namespace detail {

inline double testing_rhs(const WeightSpec& w, const ExponentTriple& tr, const BetaGamma& bg, const SetSpec& E,
                          const SetSpec& F, double r) {
    const int n1 = w.dimension().n() - 1;
    const double wpE = set_measure(w, tr.p, E);
    const double wqF = set_measure(w, tr.q, F);
    return std::exp(n1 * r * tr.one_minus() * (bg.beta - 1.0)) * std::pow(wpE, bg.gamma / tr.p) *
           std::pow(wqF, 1.0 - bg.gamma / tr.q);
}

/// Radial E and F: int_F A_{r,alpha}(chi_E)(y) w^q(y) dmu(y) as nested quadrature.
inline double testing_lhs_radial(const WeightSpec& w, const ExponentTriple& tr, const SetSpec& E, const SetSpec& F,
                                 double r) {
    const Dimension& dim = w.dimension();
    const auto chiE = E.indicator();
    const double scale = volume_factor(dim, tr.alpha, r);
    std::vector<double> breaks = w.breakpoints();
    for (double b : chiE.breakpoints()) {
        breaks.push_back(b + r);
        breaks.push_back(std::abs(b - r));
    }
    const double reach = E.outer_radius() + r;
    double total = 0.0;
    for (auto [a, b] : std::get<RadialUnion>(F.kind()).shells) {
        const double hi = std::min(b, reach);
        if (!(hi > a)) continue;
        total += radial_shell_integral(
            dim, [&](double s) { return w.pow_at(s, tr.q) * scale * radial_mass(dim, chiE, s, r); }, a, hi, breaks);
    }
    return total;
}

} // namespace detail

/// Ratio of the two sides of the testing condition
///   int_F A_{r,alpha}(chi_E) w^q <~ e^{(n-1) r (1-alpha/n)(beta-1)} w^p(E)^{gamma/p} w^q(F)^{1-gamma/q}.
/// Radial E and F use nested quadrature on the quad engine; otherwise y is
/// sampled uniformly from F's bounding ball.
inline ConditionReport testing_condition_check(const WeightSpec& w, const ExponentTriple& tr, const BetaGamma& bg,
                                               const SetSpec& E, const SetSpec& F, double r, Engine engine,
                                               const McConfig& mc = {}) {
    detail::check_weight_dim(w, tr);
    if (!(r >= 1.0)) throw DomainError("testing_condition_check: r must be at least 1");
    if (!(bg.beta > 0.0 && bg.beta < 1.0 && bg.beta <= bg.gamma && bg.gamma < tr.p)) {
        throw RangeError("testing_condition_check: need 0 < beta < 1 and beta <= gamma < p");
    }
    ConditionReport rep;
    rep.witness = {{"r", r}};
    rep.verdict = Verdict::bounded;
    if (E.is_empty() || F.is_empty()) return rep;

    const Dimension& dim = w.dimension();
    double lhs = 0.0;
    if (engine == Engine::quad && E.is_radial() && F.is_radial()) {
        lhs = detail::testing_lhs_radial(w, tr, E, F, r);
    } else {
        const HPoint center = F.anchor(dim);
        const double radius = F.is_radial() ? F.outer_radius()
                              : std::holds_alternative<BallAt>(F.kind()) ? std::get<BallAt>(F.kind()).rho
                                                                          : std::get<AnnulusCap>(F.kind()).rho;
        BallSampler sampler(dim, center, radius, mc.seed);
        auto m = detail::reduce_moments(mc.samples, mc.workers, [&](std::uint64_t i) {
            const HPoint y = sampler(i);
            if (!F.contains(y)) return 0.0;
            double a = 0.0;
            try {
                a = avg_indicator(dim, tr.alpha, E, y, r, Engine::quad);
            } catch (const DomainError&) {
                McConfig inner{mc.seed ^ (0x9E3779B97F4A7C15ULL * (i + 1)), 2048, 1};
                a = avg_indicator(dim, tr.alpha, E, y, r, Engine::mc, inner);
            }
            return a * w.pow_at(ScalarField::distance_from_origin(y), tr.q);
        });
        auto est = make_estimate(m, ball_volume(dim, radius), mc);
        lhs = est.value;
        rep.std_error = est.std_error;
        rep.samples = est.samples;
    }
    if (lhs == 0.0) return rep;
    const double rhs = detail::testing_rhs(w, tr, bg, E, F, r);
    if (!(rhs > 0.0)) {
        throw NumericalError("testing_condition_check: positive left side with zero right side", {lhs, rhs});
    }
    rep.sup_ratio = lhs / rhs;
    rep.std_error /= rhs;
    return rep;
}

/// Seeded unions of 1 to 4 disjoint shells inside B(0, radius).
inline SetSpec random_shell_union(std::uint64_t seed, std::uint64_t index, double radius) {
    CounterUniforms u(seed, 11);
    const int k = 1 + static_cast<int>(4.0 * u.uniform(index, 0));
    std::vector<double> pts(2 * k);
    for (int i = 0; i < 2 * k; ++i) pts[i] = radius * u.uniform(index, 1 + static_cast<std::uint32_t>(i));
    std::sort(pts.begin(), pts.end());
    RadialUnion set;
    for (int i = 0; i < k; ++i) {
        if (pts[2 * i + 1] > pts[2 * i]) set.shells.emplace_back(pts[2 * i], pts[2 * i + 1]);
    }
    return SetSpec(std::move(set));
}

struct TestingSweep {
    std::size_t pairs = 50;
    std::vector<double> radii{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    double set_radius = 12.0;
    std::uint64_t seed = 20240501;
};

/// sup of the testing ratio over seeded (E, F) shell-union pairs and radii. The
/// verdict compares `pairs` pairs with the nested family of 2 * pairs pairs.
inline ConditionReport testing_condition_sweep(const WeightSpec& w, const ExponentTriple& tr, const BetaGamma& bg,
                                               const TestingSweep& sw) {
    ConditionReport rep;
    double base = 0.0;
    Witness base_witness;
    for (std::size_t i = 0; i < 2 * sw.pairs; ++i) {
        const SetSpec E = random_shell_union(sw.seed, 2 * i, sw.set_radius);
        const SetSpec F = random_shell_union(sw.seed, 2 * i + 1, sw.set_radius);
        for (double r : sw.radii) {
            const auto one = testing_condition_check(w, tr, bg, E, F, r, Engine::quad);
            ++rep.samples;
            if (one.sup_ratio > rep.sup_ratio) {
                rep.sup_ratio = one.sup_ratio;
                rep.witness = {{"pair", double(i)}, {"r", r}};
            }
        }
        if (i + 1 == sw.pairs) {
            base = rep.sup_ratio;
            base_witness = rep.witness;
        }
    }
    rep.growth = stabilization_growth(base, rep.sup_ratio);
    rep.verdict = stabilization_verdict(base, rep.sup_ratio);
    rep.sup_ratio = base;
    rep.witness = std::move(base_witness);
    return rep;
}

} // namespace hypmax
