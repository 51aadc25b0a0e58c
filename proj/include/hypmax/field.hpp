#pragma once

// Functions on H^n: radial profiles t -> f(t) with t = d(0, x), general
// pointwise fields, the structured set family used by the testing
// condition, and the radius grid that discretizes sup_r.

#include "hypmax/errors.hpp"
#include "hypmax/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace hypmax {

enum class Interp { step, linear };

/// A function of the distance to the origin, tabulated at increasing nodes.
///
/// step:   f(t) = values[i] on (nodes[i-1], nodes[i]], f(0) = values[0].
/// linear: linear between nodes, values[0] on [0, nodes[0]].
/// Beyond the last node f keeps its last value; beyond support_radius f is 0.
class RadialProfile {
public:
    RadialProfile(std::vector<double> nodes, std::vector<double> values, Interp interp, double support_radius)
        : nodes_(std::move(nodes)), values_(std::move(values)), interp_(interp), support_(support_radius) {
        if (nodes_.empty() || nodes_.size() != values_.size()) {
            throw DomainError("RadialProfile: nodes and values must be nonempty and of equal length");
        }
        if (nodes_.front() < 0.0) throw DomainError("RadialProfile: nodes must be nonnegative");
        for (std::size_t i = 1; i < nodes_.size(); ++i) {
            if (!(nodes_[i] > nodes_[i - 1])) throw DomainError("RadialProfile: nodes must be strictly increasing");
        }
        for (double v : values_) {
            if (!std::isfinite(v)) throw DomainError("RadialProfile: values must be finite");
        }
        if (!(support_ > 0.0)) throw DomainError("RadialProfile: support radius must be positive");
    }

    /// c on B(0, rho) (closed ball), 0 outside.
    static RadialProfile indicator(double rho, double c = 1.0) { return {{rho}, {c}, Interp::step, rho}; }

    /// c everywhere.
    static RadialProfile constant(double c) { return {{1.0}, {c}, Interp::step, kUnbounded}; }

    /// c on the union of the shells a < t <= b; shells must be disjoint.
    static RadialProfile shells(std::vector<std::pair<double, double>> ab, double c = 1.0) {
        if (ab.empty()) return indicator(1.0, 0.0);
        std::sort(ab.begin(), ab.end());
        std::vector<double> nodes;
        std::vector<double> values;
        double last = 0.0;
        for (auto [a, b] : ab) {
            if (!(a >= 0.0) || !(b > a)) throw DomainError("RadialProfile::shells: need 0 <= a < b");
            if (a < last) throw DomainError("RadialProfile::shells: shells overlap");
            if (!nodes.empty() && a == last) {
                nodes.back() = b; // touching shells merge
            } else {
                if (a > 0.0) {
                    nodes.push_back(a);
                    values.push_back(0.0);
                }
                nodes.push_back(b);
                values.push_back(c);
            }
            last = b;
        }
        return {std::move(nodes), std::move(values), Interp::step, last};
    }

    /// Samples fn at the given nodes.
    template <class F>
    static RadialProfile tabulate(F&& fn, std::vector<double> nodes, Interp interp, double support_radius) {
        std::vector<double> values(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) values[i] = fn(nodes[i]);
        return {std::move(nodes), std::move(values), interp, support_radius};
    }

    double operator()(double t) const {
        if (t > support_) return 0.0;
        if (t <= nodes_.front()) return values_.front();
        if (t > nodes_.back()) return values_.back();
        const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
        const auto i = static_cast<std::size_t>(it - nodes_.begin());
        if (interp_ == Interp::step || *it == t) return values_[i];
        const double w = (t - nodes_[i - 1]) / (nodes_[i] - nodes_[i - 1]);
        return values_[i - 1] + w * (values_[i] - values_[i - 1]);
    }

    /// Same shape with values multiplied by c.
    RadialProfile scaled(double c) const {
        auto v = values_;
        for (double& x : v) x *= c;
        return {nodes_, std::move(v), interp_, support_};
    }

    /// |f|.
    RadialProfile absolute() const {
        auto v = values_;
        for (double& x : v) x = std::abs(x);
        return {nodes_, std::move(v), interp_, support_};
    }

    /// Points where f may fail to be smooth: nodes and the support edge.
    std::vector<double> breakpoints() const {
        std::vector<double> b = nodes_;
        if (std::isfinite(support_)) b.push_back(support_);
        return b;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    bool is_zero() const { return max_abs() == 0.0; }

    /// True when |f| is nonincreasing in t.
    bool nonincreasing_abs() const {
        for (std::size_t i = 1; i < values_.size(); ++i) {
            if (std::abs(values_[i]) > std::abs(values_[i - 1])) return false;
        }
        return true;
    }

    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> values() const noexcept { return values_; }
    Interp interp() const noexcept { return interp_; }
    double support_radius() const noexcept { return support_; }
    bool compact() const noexcept { return std::isfinite(support_); }

    static constexpr double kUnbounded = std::numeric_limits<double>::infinity();

private:
    std::vector<double> nodes_;
    std::vector<double> values_;
    Interp interp_;
    double support_;
};

/// Union of the maximal intervals of [0, hi] on which the profile satisfies
/// |f| > level (or >= level when `inclusive`). Crossings of linear pieces are
/// located exactly; step pieces switch at their nodes.
inline std::vector<std::pair<double, double>> level_set(const RadialProfile& f, double level, double hi,
                                                        bool inclusive = false) {
    auto above = [&](double v) { return inclusive ? std::abs(v) >= level : std::abs(v) > level; };
    std::vector<double> cuts{0.0};
    for (double b : f.breakpoints()) {
        if (b > 0.0 && b < hi) cuts.push_back(b);
    }
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<std::pair<double, double>> out;
    auto emit = [&](double a, double b) {
        if (!(b > a)) return;
        if (!out.empty() && out.back().second >= a) out.back().second = std::max(out.back().second, b);
        else out.emplace_back(a, b);
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        if (f.interp() == Interp::step || b > f.nodes().back() || b <= f.nodes().front() || a >= f.support_radius()) {
            // constant on (a, b]
            if (above(f(b))) emit(a, b);
            continue;
        }
        const double fa = std::abs(f(a));
        const double fb = std::abs(f(b));
        const bool ua = above(fa);
        const bool ub = above(fb);
        if (ua && ub) {
            emit(a, b);
        } else if (ua != ub) {
            // |f| is linear on [a, b] unless f changes sign; the sign-change case is treated as linear in |f|
            const double c = a + (level - fa) / (fb - fa) * (b - a);
            if (ua) emit(a, c);
            else emit(c, b);
        }
    }
    return out;
}

/// A pointwise-evaluable function on H^n. When a radial hint is present the
/// evaluator is f(x) = hint(d(0, x)) and quadrature paths become available.
class ScalarField {
public:
    using Evaluator = std::function<double(const HPoint&)>;

    static ScalarField radial(RadialProfile profile) {
        ScalarField f;
        auto shared = std::make_shared<RadialProfile>(std::move(profile));
        f.eval_ = [shared](const HPoint& x) { return (*shared)(distance_from_origin(x)); };
        f.support_ = shared->support_radius();
        f.hint_ = shared;
        return f;
    }

    /// A general field vanishing outside B(0, support_radius).
    static ScalarField general(Evaluator eval, double support_radius = RadialProfile::kUnbounded) {
        if (!eval) throw DomainError("ScalarField: empty evaluator");
        ScalarField f;
        f.eval_ = std::move(eval);
        f.support_ = support_radius;
        return f;
    }

    double operator()(const HPoint& x) const { return eval_(x); }
    const RadialProfile* radial_hint() const noexcept { return hint_.get(); }
    double support_radius() const noexcept { return support_; }

    static double distance_from_origin(const HPoint& x) {
        // acosh(x0), with the chord form near the origin
        const double x0 = x[0];
        if (x0 > 2.0) return std::acosh(x0);
        double s2 = 0.0;
        for (int i = 1; i <= x.dim(); ++i) s2 += x[i] * x[i];
        return std::asinh(std::sqrt(s2));
    }

private:
    ScalarField() = default;

    Evaluator eval_;
    std::shared_ptr<const RadialProfile> hint_;
    double support_ = RadialProfile::kUnbounded;
};

/// Sets E, F of the testing condition, restricted to a constructible family.
struct RadialUnion {
    std::vector<std::pair<double, double>> shells; // (a, b] pieces
};

/// B(z, rho) with z on the first axis at distance t from the origin.
struct BallAt {
    double t;
    double rho;
};

/// C_l intersected with a ball.
struct AnnulusCap {
    AnnulusIndex l;
    double t;
    double rho;
};

class SetSpec {
public:
    using Kind = std::variant<RadialUnion, BallAt, AnnulusCap>;

    explicit SetSpec(Kind kind) : kind_(std::move(kind)) {
        if (auto* u = std::get_if<RadialUnion>(&kind_)) {
            auto sorted = u->shells;
            std::sort(sorted.begin(), sorted.end());
            double last = 0.0;
            for (auto [a, b] : sorted) {
                if (!(a >= 0.0) || !(b > a)) throw DomainError("SetSpec: shell needs 0 <= a < b");
                if (a < last) throw DomainError("SetSpec: shells overlap");
                last = b;
            }
            u->shells = std::move(sorted);
        } else if (auto* ball = std::get_if<BallAt>(&kind_)) {
            if (!(ball->t >= 0.0) || !(ball->rho > 0.0)) throw DomainError("SetSpec: ball needs t >= 0, rho > 0");
        } else {
            const auto& cap = std::get<AnnulusCap>(kind_);
            if (cap.l.j < 1 || !(cap.t >= 0.0) || !(cap.rho > 0.0)) {
                throw DomainError("SetSpec: annulus cap needs l >= 1, t >= 0, rho > 0");
            }
        }
    }

    static SetSpec empty() { return SetSpec(RadialUnion{}); }

    const Kind& kind() const noexcept { return kind_; }
    bool is_radial() const noexcept { return std::holds_alternative<RadialUnion>(kind_); }
    bool is_empty() const {
        auto* u = std::get_if<RadialUnion>(&kind_);
        return u && u->shells.empty();
    }

    /// The ball's center z = axis_point(t) for the ball-based kinds.
    HPoint anchor(const Dimension& dim) const {
        if (auto* b = std::get_if<BallAt>(&kind_)) return axis_point(dim, b->t);
        if (auto* c = std::get_if<AnnulusCap>(&kind_)) return axis_point(dim, c->t);
        return HPoint::origin(dim);
    }

    bool contains(const HPoint& x) const {
        const double s = ScalarField::distance_from_origin(x);
        if (auto* u = std::get_if<RadialUnion>(&kind_)) {
            for (auto [a, b] : u->shells) {
                if (s > a && s <= b) return true;
            }
            return false;
        }
        const Dimension dim(x.dim());
        if (auto* b = std::get_if<BallAt>(&kind_)) return hdist(axis_point(dim, b->t), x) <= b->rho;
        const auto& c = std::get<AnnulusCap>(kind_);
        return s > c.l.j - 1 && s <= c.l.j && hdist(axis_point(dim, c.t), x) <= c.rho;
    }

    /// Smallest centered radius R with the set inside B(0, R).
    double outer_radius() const {
        if (auto* u = std::get_if<RadialUnion>(&kind_)) return u->shells.empty() ? 0.0 : u->shells.back().second;
        if (auto* b = std::get_if<BallAt>(&kind_)) return b->t + b->rho;
        const auto& c = std::get<AnnulusCap>(kind_);
        return std::min<double>(c.l.j, c.t + c.rho);
    }

    /// Indicator profile; only for radial sets.
    RadialProfile indicator() const {
        auto* u = std::get_if<RadialUnion>(&kind_);
        if (!u) throw DomainError("SetSpec::indicator: set is not radial");
        return RadialProfile::shells(u->shells);
    }

private:
    Kind kind_;
};

/// Radius grid for sup_r: {k local_step} up to 2 and {2 + k far_step} up to r_max.
struct RadiusGrid {
    double local_step = 0.05;
    double far_step = 0.1;
    double r_max = 12.0;

    void validate() const {
        if (!(local_step > 0.0 && local_step <= 0.1)) throw ConfigError("RadiusGrid: need 0 < local_step <= 0.1");
        if (!(far_step > 0.0 && far_step <= 0.25)) throw ConfigError("RadiusGrid: need 0 < far_step <= 0.25");
        if (!(r_max >= 2.0)) throw ConfigError("RadiusGrid: need r_max >= 2");
    }

    /// Default grid for f supported in B(0, support) and points of B(0, domain).
    static RadiusGrid for_domain(double support, double domain) {
        RadiusGrid g;
        g.r_max = std::max(2.0, support + domain + 1.0);
        return g;
    }

    std::vector<double> local_radii() const {
        std::vector<double> out;
        const int m = static_cast<int>(std::floor(2.0 / local_step + 1e-9));
        for (int k = 1; k <= m; ++k) out.push_back(k * local_step);
        if (out.empty() || out.back() < 2.0 - 1e-12) out.push_back(2.0);
        return out;
    }

    std::vector<double> far_radii() const {
        std::vector<double> out;
        const int m = static_cast<int>(std::floor((r_max - 2.0) / far_step + 1e-9));
        for (int k = 1; k <= m; ++k) out.push_back(2.0 + k * far_step);
        if (r_max > 2.0 && (out.empty() || out.back() < r_max - 1e-12)) out.push_back(r_max);
        return out;
    }

    RadiusGrid refined() const { return {0.5 * local_step, 0.5 * far_step, r_max}; }
};

} // namespace hypmax
