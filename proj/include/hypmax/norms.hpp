#pragma once

// Weighted strong and weak norms on truncated domains B(0, R), the Riesz
// divergence scan for M_alpha, and the distributional diagnostic comparing
// w^q({A_{r,alpha}(A_1 f) > lambda}) with the sum over level sets of A_2 f.

#include "hypmax/field.hpp"
#include "hypmax/monte_carlo.hpp"
#include "hypmax/operators.hpp"
#include "hypmax/radial.hpp"
#include "hypmax/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

namespace hypmax {

/// Every integral is restricted to B(0, R).
struct TruncatedDomain {
    double R;

    explicit TruncatedDomain(double r) : R(r) {
        if (!(r > 0.0)) throw DomainError("TruncatedDomain: R must be positive");
    }
};

struct NormResult {
    double value = 0.0;
    double R = 0.0;
    Engine method = Engine::quad;
    double std_error = 0.0;
};

namespace detail {

inline std::vector<double> merged_breaks(const RadialProfile& g, const WeightSpec& w) {
    auto b = g.breakpoints();
    const auto wb = w.breakpoints();
    b.insert(b.end(), wb.begin(), wb.end());
    return b;
}

/// w^e measure of a union of shells.
inline double shells_measure(const WeightSpec& w, double e, const std::vector<std::pair<double, double>>& shells) {
    double total = 0.0;
    for (auto [a, b] : shells) total += w.shell_measure(e, a, b);
    return total;
}

} // namespace detail

/// (int_{B(0,R)} |g|^p w^p dmu)^{1/p}.
inline NormResult lp_weighted_norm(const ScalarField& g, const WeightSpec& w, double p_exp, TruncatedDomain dom,
                                   Engine engine, const McConfig& mc = {}) {
    if (!(p_exp >= 1.0)) throw DomainError("lp_weighted_norm: exponent must be at least 1");
    const Dimension& dim = w.dimension();
    NormResult out;
    out.R = dom.R;
    out.method = engine;
    auto integrand = [&](double s, double gv) {
        const double v = std::pow(std::abs(gv), p_exp) * w.pow_at(s, p_exp);
        if (!std::isfinite(v)) {
            throw NumericalError("lp_weighted_norm: integrand is not finite at distance " + std::to_string(s), {s});
        }
        return v;
    };
    if (engine == Engine::quad) {
        const RadialProfile* hint = g.radial_hint();
        if (!hint) throw DomainError("lp_weighted_norm: the quad engine needs a radial field");
        if (hint->is_zero()) return out;
        const double hi = std::min(dom.R, hint->support_radius());
        const auto breaks = detail::merged_breaks(*hint, w);
        const double v = radial_shell_integral(dim, [&](double s) { return integrand(s, (*hint)(s)); }, 0.0, hi, breaks);
        out.value = std::pow(v, 1.0 / p_exp);
        return out;
    }
    auto est = mc_integrate_ball(
        dim, HPoint::origin(dim), dom.R,
        [&](const HPoint& x) { return integrand(ScalarField::distance_from_origin(x), g(x)); }, mc);
    out.value = std::pow(est.value, 1.0 / p_exp);
    // delta method: d(v^{1/p}) = v^{1/p - 1}/p dv
    out.std_error = est.value > 0.0 ? out.value / (p_exp * est.value) * est.std_error : 0.0;
    return out;
}

/// 200 geometric levels spanning [1e-6, 1e2] * peak.
inline std::vector<double> default_lambda_grid(double peak, int points = 200) {
    std::vector<double> out;
    if (!(peak > 0.0)) return out;
    for (int i = 0; i < points; ++i) out.push_back(peak * std::pow(10.0, -6.0 + 8.0 * i / (points - 1)));
    return out;
}

/// sup over lambda of lambda * w^q({x in B(0,R) : |g(x)| > lambda})^{1/q}. For
/// radial g the level sets are unions of shells and the grid is augmented with
/// the tabulated values of |g| (taken as left limits, i.e. with >=), which makes
/// the norm exact for step profiles. Otherwise the level sets are estimated from
/// one Monte Carlo stream shared by all levels.
inline NormResult weak_lq_norm(const ScalarField& g, const WeightSpec& w, double q_exp, TruncatedDomain dom,
                               std::optional<std::vector<double>> lambda_grid = std::nullopt, Engine engine = Engine::quad,
                               const McConfig& mc = {}) {
    if (!(q_exp >= 1.0)) throw DomainError("weak_lq_norm: exponent must be at least 1");
    const Dimension& dim = w.dimension();
    NormResult out;
    out.R = dom.R;
    out.method = engine;
    if (engine == Engine::quad) {
        const RadialProfile* hint = g.radial_hint();
        if (!hint) throw DomainError("weak_lq_norm: the quad engine needs a radial field");
        if (hint->is_zero()) return out;
        const double hi = std::min(dom.R, hint->support_radius());
        auto grid = lambda_grid ? *lambda_grid : default_lambda_grid(hint->max_abs());
        double best = 0.0;
        for (double lam : grid) {
            if (!(lam > 0.0)) throw DomainError("weak_lq_norm: levels must be positive");
            const double m = detail::shells_measure(w, q_exp, level_set(*hint, lam, hi));
            best = std::max(best, lam * std::pow(m, 1.0 / q_exp));
        }
        for (std::size_t i = 0; i < hint->values().size(); ++i) {
            if (hint->nodes()[i] > hi && i > 0 && hint->nodes()[i - 1] >= hi) break;
            const double lam = std::abs(hint->values()[i]);
            if (lam == 0.0) continue;
            const double m = detail::shells_measure(w, q_exp, level_set(*hint, lam, hi, true));
            best = std::max(best, lam * std::pow(m, 1.0 / q_exp));
        }
        out.value = best;
        return out;
    }
    if (!lambda_grid) throw DomainError("weak_lq_norm: the mc engine needs an explicit lambda grid");
    const auto& grid = *lambda_grid;
    BallSampler sampler(dim, HPoint::origin(dim), dom.R, mc.seed);
    std::vector<std::pair<double, double>> samples(mc.samples); // (|g|, w^q)
    detail::for_each_chunk((mc.samples + detail::kChunk - 1) / detail::kChunk, mc.workers, [&](std::uint64_t c) {
        const std::uint64_t end = std::min<std::uint64_t>(mc.samples, (c + 1) * detail::kChunk);
        for (std::uint64_t i = c * detail::kChunk; i < end; ++i) {
            const HPoint x = sampler(i);
            samples[i] = {std::abs(g(x)), w.pow_at(ScalarField::distance_from_origin(x), q_exp)};
        }
    });
    const double vol = ball_volume(dim, dom.R);
    double best = 0.0;
    for (double lam : grid) {
        double acc = 0.0;
        for (auto [gv, wq] : samples) acc += gv > lam ? wq : 0.0;
        best = std::max(best, lam * std::pow(acc / static_cast<double>(mc.samples) * vol, 1.0 / q_exp));
    }
    out.value = best;
    return out;
}

/// Least-squares slope of log y against log x.
inline double fit_power_law(std::span<const double> x, std::span<const double> y) {
    const std::size_t m = x.size();
    if (m < 2 || y.size() != m) throw DomainError("fit_power_law: need at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

struct RieszRow {
    double R;
    double strong;
    double weak;
    double input;
};

struct RieszScan {
    std::vector<RieszRow> rows;
    /// Fitted exponent e of strong ~ R^e.
    double strong_exponent = 0.0;
    /// max/min of the strong and weak norms across R.
    double strong_spread = 1.0;
    double weak_spread = 1.0;
    /// strong(R_last) / strong(R_first).
    double strong_ratio = 1.0;
    bool strong_monotone = true;
    /// The tabulated M_alpha f.
    std::vector<double> t_nodes;
    std::vector<double> maximal_values;

    /// Thresholds used by the experiments: stable strong norms vary by less
    /// than 1.2x, stable weak norms by less than 2x, divergence needs monotone
    /// growth of at least 1.3x.
    bool strong_stable() const { return strong_spread < 1.2; }
    bool weak_stable() const { return weak_spread < 2.0; }
    bool strong_diverges() const { return strong_monotone && strong_ratio >= 1.3; }
};

struct RieszOptions {
    RadiusGrid grid{};
    /// Spacing of the tabulated M_alpha f.
    double t_step = 0.05;
};

/// Per R in R_list: ||M_alpha f||_{L^q(w^q)} and ||M_alpha f||_{L^{q,inf}(w^q)} on
/// B(0, R), and ||f||_{L^p(w^p)}. M_alpha f is tabulated once up to max R
/// (grid.r_max is raised to cover it).
inline RieszScan riesz_divergence_scan(const RadialProfile& f, const WeightSpec& w, const ExponentTriple& tr,
                                       std::span<const double> R_list, const RieszOptions& opt = {}) {
    if (!f.compact()) throw DomainError("riesz_divergence_scan: f must have compact support");
    if (R_list.empty()) throw DomainError("riesz_divergence_scan: empty R list");
    for (std::size_t i = 1; i < R_list.size(); ++i) {
        if (!(R_list[i] > R_list[i - 1])) throw DomainError("riesz_divergence_scan: R list must increase");
    }
    const Dimension& dim = w.dimension();
    const double R_top = R_list.back();
    RadiusGrid grid = opt.grid;
    grid.r_max = std::max(grid.r_max, f.support_radius() + R_top + 1.0);

    std::vector<double> nodes;
    const int m = static_cast<int>(std::ceil(R_top / opt.t_step - 1e-9));
    for (int i = 0; i <= m; ++i) nodes.push_back(std::min(R_top, i * opt.t_step));
    for (double R : R_list) nodes.push_back(R);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    const auto Mf = maximal_profile(dim, tr.alpha, f, grid, nodes);
    const auto field = ScalarField::radial(Mf);

    RieszScan scan;
    scan.t_nodes.assign(Mf.nodes().begin(), Mf.nodes().end());
    scan.maximal_values.assign(Mf.values().begin(), Mf.values().end());
    const double input = lp_weighted_norm(ScalarField::radial(f), w, tr.p, TruncatedDomain(f.support_radius()),
                                          Engine::quad)
                             .value;
    std::vector<double> Rs;
    std::vector<double> strong;
    for (double R : R_list) {
        RieszRow row{R, lp_weighted_norm(field, w, tr.q, TruncatedDomain(R), Engine::quad).value,
                     weak_lq_norm(field, w, tr.q, TruncatedDomain(R)).value, input};
        scan.rows.push_back(row);
        Rs.push_back(R);
        strong.push_back(row.strong);
    }
    auto spread = [](auto get, const std::vector<RieszRow>& rows) {
        double lo = get(rows.front());
        double hi = lo;
        for (const auto& r : rows) {
            lo = std::min(lo, get(r));
            hi = std::max(hi, get(r));
        }
        return lo > 0.0 ? hi / lo : 1.0;
    };
    scan.strong_spread = spread([](const RieszRow& r) { return r.strong; }, scan.rows);
    scan.weak_spread = spread([](const RieszRow& r) { return r.weak; }, scan.rows);
    scan.strong_ratio = scan.rows.back().strong / scan.rows.front().strong;
    for (std::size_t i = 1; i < scan.rows.size(); ++i) {
        scan.strong_monotone = scan.strong_monotone && scan.rows[i].strong > scan.rows[i - 1].strong;
    }
    scan.strong_exponent = Rs.size() > 1 ? fit_power_law(Rs, strong) : 0.0;
    return scan;
}

struct LemmaResult {
    double lhs = 0.0;
    double rhs_sum = 0.0;
    /// lhs / rhs_sum; 0 when lhs = 0, +inf when rhs_sum = 0 < lhs (eta too large).
    double ratio = 0.0;
    bool failure = false;
};

struct LemmaOptions {
    double epsilon = 0.5;
    /// eta <= 0 selects the default c0 / e^{n-1} with c0 = V(1)/V(2).
    double eta = 0.0;
    double t_step = 0.02;

    double eta_for(const Dimension& dim) const {
        if (eta > 0.0) return eta;
        return ball_volume(dim, 1.0) / ball_volume(dim, 2.0) / std::exp(dim.n() - 1.0);
    }
};

/// Tabulated pieces shared by every lambda at one r.
struct LemmaProfiles {
    RadialProfile inner; // A_{r,alpha}(A_1 f)
    RadialProfile a2;    // A_2 f
    int r;
};

inline LemmaProfiles lemma_profiles(const Dimension& dim, const RadialProfile& f, double alpha, int r,
                                    double t_step) {
    if (!f.compact()) throw DomainError("lemma21: f must have compact support");
    auto nodes_to = [t_step](double hi) {
        std::vector<double> v;
        const int m = static_cast<int>(std::ceil(hi / t_step - 1e-9));
        for (int i = 0; i <= m; ++i) v.push_back(std::min(hi, i * t_step));
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    const double rho = f.support_radius();
    const auto a1 = average_profile(dim, 0.0, f, 1.0, nodes_to(rho + 1.0));
    auto inner = average_profile(dim, alpha, a1, r, nodes_to(rho + 1.0 + r));
    auto a2 = average_profile(dim, 0.0, f, 2.0, nodes_to(rho + 2.0));
    return {std::move(inner), std::move(a2), r};
}

/// Both sides of
///   w^q({A_{r,alpha}(A_1 f) > lambda}) <~ sum_{k=0}^r e^{(n-1)kq/gamma} (e^{(n-1)(r-k)})^{(q/gamma)eps}
///       e^{(n-1) r (q/gamma)(beta - 1 - beta alpha/n)} w^p({A_2 f e^{(n-1) r alpha/n} >= eta e^{(n-1)(k-1)} lambda})^{q/p}.
inline LemmaResult lemma21_diagnostic(const LemmaProfiles& pr, const WeightSpec& w, const ExponentTriple& tr,
                                      const BetaGamma& bg, double lambda, const LemmaOptions& opt = {}) {
    const Dimension& dim = w.dimension();
    if (pr.r < 1) throw DomainError("lemma21: r must be at least 1");
    if (!(opt.epsilon > 0.0 && opt.epsilon < 1.0)) throw DomainError("lemma21: epsilon must lie in (0, 1)");
    if (!(lambda > 0.0)) throw DomainError("lemma21: lambda must be positive");
    const int n1 = dim.n() - 1;
    const double r = pr.r;
    const double eta = opt.eta_for(dim);
    const double qg = tr.q / bg.gamma;
    LemmaResult out;
    out.lhs = detail::shells_measure(w, tr.q, level_set(pr.inner, lambda, pr.inner.support_radius()));
    const double lift = std::exp(n1 * r * tr.alpha / dim.n());
    for (int k = 0; k <= pr.r; ++k) {
        const double level = eta * std::exp(n1 * (k - 1.0)) * lambda / lift;
        const double m = detail::shells_measure(w, tr.p, level_set(pr.a2, level, pr.a2.support_radius(), true));
        if (m == 0.0) continue;
        const double log_factor =
            n1 * (k * qg + (r - k) * qg * opt.epsilon + r * qg * (bg.beta - 1.0 - bg.beta * tr.alpha / dim.n()));
        out.rhs_sum += std::exp(log_factor + tr.q / tr.p * std::log(m));
    }
    if (out.lhs == 0.0) return out;
    if (out.rhs_sum == 0.0) {
        out.ratio = std::numeric_limits<double>::infinity();
        out.failure = true;
        return out;
    }
    out.ratio = out.lhs / out.rhs_sum;
    return out;
}

struct LemmaScanRow {
    int r;
    /// max over the lambda grid of lhs / rhs_sum, failures excluded.
    double min_constant;
    double lambda_at_max;
    bool failure;
};

/// min_constant per r, lambdas geometric over [1e-6, 1] * sup A_{r,alpha}(A_1 f).
inline std::vector<LemmaScanRow> lemma21_scan(const RadialProfile& f, const WeightSpec& w, const ExponentTriple& tr,
                                              const BetaGamma& bg, std::span<const int> r_list,
                                              const LemmaOptions& opt = {}, int lambda_points = 61) {
    const Dimension& dim = w.dimension();
    std::vector<LemmaScanRow> out;
    for (int r : r_list) {
        const auto pr = lemma_profiles(dim, f, tr.alpha, r, opt.t_step);
        LemmaScanRow row{r, 0.0, 0.0, false};
        const double peak = pr.inner.max_abs();
        for (int i = 0; i < lambda_points && peak > 0.0; ++i) {
            const double lam = peak * std::pow(10.0, -6.0 * (1.0 - double(i) / (lambda_points - 1)));
            const auto res = lemma21_diagnostic(pr, w, tr, bg, lam, opt);
            row.failure = row.failure || res.failure;
            if (!res.failure && res.ratio > row.min_constant) {
                row.min_constant = res.ratio;
                row.lambda_at_max = lam;
            }
        }
        out.push_back(row);
    }
    return out;
}

} // namespace hypmax
