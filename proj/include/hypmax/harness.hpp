#pragma once

// Experiment configs (JSON, versioned), the seven experiments and the suite
// runner that compares verdicts against a shipped expectation table.

#include "hypmax/field.hpp"
#include "hypmax/geometry.hpp"
#include "hypmax/monte_carlo.hpp"
#include "hypmax/norms.hpp"
#include "hypmax/operators.hpp"
#include "hypmax/radial.hpp"
#include "hypmax/report.hpp"
#include "hypmax/weights.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace hypmax {

inline constexpr int kSchemaVersion = 1;

/// Frozen bound for mu(B(x,r) cap B(y,s)) / e^{(n-1)(r+s-d)/2}, n = 2, radii <= 8.
/// The exact ratio over the default 100 seeded pairs peaks at 3.904.
inline constexpr double kIntersectionBound = 5.0;

enum class Experiment {
    volume_asymptotics,
    intersection_bound,
    weight_conditions,
    example_i,
    example_ii,
    lemma_diag,
    testing_condition
};

inline const char* to_string(Experiment e) {
    switch (e) {
    case Experiment::volume_asymptotics: return "volume_asymptotics";
    case Experiment::intersection_bound: return "intersection_bound";
    case Experiment::weight_conditions: return "weight_conditions";
    case Experiment::example_i: return "example_i";
    case Experiment::example_ii: return "example_ii";
    case Experiment::lemma_diag: return "lemma_diag";
    case Experiment::testing_condition: return "testing_condition";
    }
    return "?";
}

inline Experiment experiment_from_string(const std::string& s) {
    for (auto e : {Experiment::volume_asymptotics, Experiment::intersection_bound, Experiment::weight_conditions,
                   Experiment::example_i, Experiment::example_ii, Experiment::lemma_diag,
                   Experiment::testing_condition}) {
        if (s == to_string(e)) return e;
    }
    throw ConfigError("unknown experiment '" + s + "'");
}

/// HYPMAX_THREADS caps the worker count.
inline unsigned effective_workers(unsigned requested) {
    unsigned w = std::max(1u, requested);
    if (const char* env = std::getenv("HYPMAX_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1) w = std::min<unsigned>(w, static_cast<unsigned>(cap));
    }
    return w;
}

struct WeightConfig {
    /// power_volume (w_theta) or constant.
    std::string kind = "power_volume";
    /// Unset: the experiment's default theta.
    std::optional<double> theta;
    double c = 1.0;
};

struct ExperimentConfig {
    std::string name;
    Experiment experiment = Experiment::example_i;
    int n = 2;
    double alpha = 1.0;
    double p = 4.0 / 3.0;
    WeightConfig weight;
    RadiusGrid grid;
    McConfig mc;
    std::vector<double> R_list{10, 20, 30, 40};
    /// Output directory; empty writes nothing.
    std::string output;

    // volume_asymptotics
    std::vector<int> dims{2, 3};
    double volume_r_min = 0.01;
    double volume_r_max = 25.0;
    int volume_points = 100;
    // intersection_bound
    std::size_t pairs = 100;
    double max_radius = 8.0;
    double bound_constant = kIntersectionBound;
    // weight_conditions, example_i, example_ii
    std::vector<double> cj_thetas{-1.0 / 3.0, 0.0, 0.5, 1.0};
    std::vector<double> cj2_thetas{-1.0, -0.5, 0.0, 0.5};
    AnnulusGrid annulus;
    /// Offsets delta = theta -/+ delta_probe are probed next to delta = theta; 0 disables.
    double delta_probe = 0.05;
    double local_t_max = 10.0;
    std::vector<double> global_R{5, 10, 20, 30};
    double t_step = 0.05;
    // lemma_diag, testing_condition
    std::optional<double> delta;
    std::vector<int> lemma_r{2, 3, 4, 5, 6, 7, 8};
    double epsilon = 0.5;
    double eta = 0.0;
    int lambda_points = 61;
    TestingSweep sweep;

    ExponentTriple triple() const { return ExponentTriple::from_p(n, alpha, p); }

    double theta() const {
        if (weight.kind == "constant") return 0.0;
        if (weight.theta) return *weight.theta;
        const auto tr = triple();
        // example (ii) lives in the strong window; the rest at the weak-window edge -q/p'
        if (experiment == Experiment::example_ii) return 1.0;
        return std::isfinite(tr.p_prime()) ? -tr.q / tr.p_prime() : 0.0;
    }

    double delta_value() const { return delta ? *delta : theta(); }

    WeightSpec weight_spec() const {
        const Dimension dim(n);
        if (weight.kind == "constant") return WeightSpec::constant(dim, weight.c);
        return WeightSpec::power_volume(dim, theta(), triple().q);
    }

    void validate() const {
        if (name.empty()) throw ConfigError("config: empty name");
        if (n < 2) throw ConfigError("config: n must be at least 2");
        try {
            triple();
        } catch (const RangeError& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        if (weight.kind != "power_volume" && weight.kind != "constant") {
            throw ConfigError("config: weight.kind must be power_volume or constant");
        }
        if (weight.kind == "constant" && !(weight.c > 0.0)) throw ConfigError("config: weight.c must be positive");
        grid.validate();
        if (mc.samples == 0) throw ConfigError("config: mc.samples must be positive");
        if (R_list.empty()) throw ConfigError("config: R_list must not be empty");
        for (std::size_t i = 0; i < R_list.size(); ++i) {
            if (!(R_list[i] > 0.0) || (i && !(R_list[i] > R_list[i - 1]))) {
                throw ConfigError("config: R_list must be positive and increasing");
            }
        }
        if (!(volume_r_min > 0.0 && volume_r_max > volume_r_min && volume_points >= 2)) {
            throw ConfigError("config: bad volume grid");
        }
        for (int d : dims) {
            if (d < 2) throw ConfigError("config: dims must be at least 2");
        }
        if (!(max_radius > 0.0) || !(bound_constant > 0.0)) throw ConfigError("config: bad intersection settings");
        if (annulus.j_max < 1 || annulus.r_max < 1 || annulus.samples < 2) throw ConfigError("config: bad annulus grid");
        if (!(delta_probe >= 0.0)) throw ConfigError("config: delta_probe must be nonnegative");
        if (!(t_step > 0.0 && t_step <= 0.5)) throw ConfigError("config: t_step must lie in (0, 0.5]");
        if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("config: epsilon must lie in (0, 1)");
        if (lambda_points < 2) throw ConfigError("config: lambda_points must be at least 2");
        for (int r : lemma_r) {
            if (r < 1) throw ConfigError("config: lemma_r entries must be at least 1");
        }
        if (sweep.pairs == 0 || sweep.radii.empty() || !(sweep.set_radius > 0.0)) {
            throw ConfigError("config: bad testing sweep");
        }
    }
};

namespace detail {

using json = nlohmann::json;

/// Reads the keys of one JSON object and rejects the ones nobody asked for.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where_ + "." + key + ": " + e.what());
        }
    }

    template <class T>
    void get(const char* key, std::optional<T>& out) {
        T v{};
        if (!j_.contains(key)) return;
        get(key, v);
        out = v;
    }

    bool has(const char* key) const { return j_.contains(key); }

    const json& sub(const char* key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string path(const char* key) const { return where_ + "." + key; }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.count(item.key())) throw ConfigError(where_ + ": unknown key '" + item.key() + "'");
        }
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

inline void check_schema(ObjectReader& rd, const std::string& where) {
    int version = -1;
    rd.get("schema_version", version);
    if (version != kSchemaVersion) {
        throw ConfigError(where + ": schema_version must be " + std::to_string(kSchemaVersion));
    }
}

} // namespace detail

/// Fills `cfg` from a JSON object; keys absent from the object keep their value.
inline void apply_config_json(ExperimentConfig& cfg, const nlohmann::json& j, const std::string& where) {
    detail::ObjectReader rd(j, where);
    if (rd.has("schema_version")) detail::check_schema(rd, where);
    if (rd.has("experiment")) {
        std::string e;
        rd.get("experiment", e);
        cfg.experiment = experiment_from_string(e);
        if (!rd.has("name")) cfg.name = e;
    }
    rd.get("name", cfg.name);
    rd.get("n", cfg.n);
    rd.get("alpha", cfg.alpha);
    rd.get("p", cfg.p);
    rd.get("R_list", cfg.R_list);
    rd.get("output", cfg.output);
    if (rd.has("weight")) {
        detail::ObjectReader w(rd.sub("weight"), rd.path("weight"));
        w.get("kind", cfg.weight.kind);
        w.get("theta", cfg.weight.theta);
        w.get("c", cfg.weight.c);
        w.finish();
    }
    if (rd.has("grid")) {
        detail::ObjectReader g(rd.sub("grid"), rd.path("grid"));
        g.get("local_step", cfg.grid.local_step);
        g.get("far_step", cfg.grid.far_step);
        g.get("r_max", cfg.grid.r_max);
        g.finish();
    }
    if (rd.has("mc")) {
        detail::ObjectReader m(rd.sub("mc"), rd.path("mc"));
        m.get("seed", cfg.mc.seed);
        m.get("samples", cfg.mc.samples);
        m.get("workers", cfg.mc.workers);
        m.finish();
    }
    rd.get("dims", cfg.dims);
    rd.get("volume_r_min", cfg.volume_r_min);
    rd.get("volume_r_max", cfg.volume_r_max);
    rd.get("volume_points", cfg.volume_points);
    rd.get("pairs", cfg.pairs);
    rd.get("max_radius", cfg.max_radius);
    rd.get("bound_constant", cfg.bound_constant);
    rd.get("cj_thetas", cfg.cj_thetas);
    rd.get("cj2_thetas", cfg.cj2_thetas);
    if (rd.has("annulus")) {
        detail::ObjectReader a(rd.sub("annulus"), rd.path("annulus"));
        a.get("j_max", cfg.annulus.j_max);
        a.get("r_max", cfg.annulus.r_max);
        a.get("samples", cfg.annulus.samples);
        a.finish();
    }
    rd.get("delta_probe", cfg.delta_probe);
    rd.get("local_t_max", cfg.local_t_max);
    rd.get("global_R", cfg.global_R);
    rd.get("t_step", cfg.t_step);
    rd.get("delta", cfg.delta);
    rd.get("lemma_r", cfg.lemma_r);
    rd.get("epsilon", cfg.epsilon);
    rd.get("eta", cfg.eta);
    rd.get("lambda_points", cfg.lambda_points);
    if (rd.has("sweep")) {
        detail::ObjectReader s(rd.sub("sweep"), rd.path("sweep"));
        s.get("pairs", cfg.sweep.pairs);
        s.get("radii", cfg.sweep.radii);
        s.get("set_radius", cfg.sweep.set_radius);
        s.finish();
    }
    rd.finish();
}

inline ExperimentConfig default_config(Experiment e) {
    ExperimentConfig cfg;
    cfg.experiment = e;
    cfg.name = to_string(e);
    return cfg;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& where) {
    ExperimentConfig cfg;
    if (!j.is_object() || !j.contains("experiment")) throw ConfigError(where + ": missing 'experiment'");
    apply_config_json(cfg, j, where);
    cfg.validate();
    return cfg;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

/// Parameter echo written into JSON reports; excludes settings that cannot
/// change results (worker count, output directory).
inline nlohmann::ordered_json config_echo(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["name"] = c.name;
    j["experiment"] = to_string(c.experiment);
    j["n"] = c.n;
    j["alpha"] = c.alpha;
    j["p"] = c.p;
    j["q"] = c.triple().q;
    j["weight"] = {{"kind", c.weight.kind}, {"theta", c.theta()}, {"c", c.weight.c}};
    j["grid"] = {{"local_step", c.grid.local_step}, {"far_step", c.grid.far_step}, {"r_max", c.grid.r_max}};
    j["mc"] = {{"seed", c.mc.seed}, {"samples", c.mc.samples}};
    j["R_list"] = c.R_list;
    switch (c.experiment) {
    case Experiment::volume_asymptotics:
        j["dims"] = c.dims;
        j["volume_r_min"] = c.volume_r_min;
        j["volume_r_max"] = c.volume_r_max;
        j["volume_points"] = c.volume_points;
        break;
    case Experiment::intersection_bound:
        j["pairs"] = c.pairs;
        j["max_radius"] = c.max_radius;
        j["bound_constant"] = c.bound_constant;
        break;
    case Experiment::weight_conditions:
    case Experiment::example_i:
    case Experiment::example_ii:
        j["cj_thetas"] = c.cj_thetas;
        j["cj2_thetas"] = c.cj2_thetas;
        j["annulus"] = {{"j_max", c.annulus.j_max}, {"r_max", c.annulus.r_max}, {"samples", c.annulus.samples}};
        j["delta_probe"] = c.delta_probe;
        j["local_t_max"] = c.local_t_max;
        j["global_R"] = c.global_R;
        j["t_step"] = c.t_step;
        break;
    case Experiment::lemma_diag:
        j["delta"] = c.delta_value();
        j["lemma_r"] = c.lemma_r;
        j["epsilon"] = c.epsilon;
        j["eta"] = LemmaOptions{c.epsilon, c.eta}.eta_for(Dimension(c.n));
        j["lambda_points"] = c.lambda_points;
        break;
    case Experiment::testing_condition:
        j["delta"] = c.delta_value();
        j["sweep"] = {{"pairs", c.sweep.pairs}, {"radii", c.sweep.radii}, {"set_radius", c.sweep.set_radius}};
        break;
    }
    return j;
}

namespace detail {

inline Report start_report(const ExperimentConfig& cfg, std::vector<std::string> columns) {
    Report r;
    r.name = cfg.name;
    r.experiment = to_string(cfg.experiment);
    r.table = Table(std::move(columns));
    r.config = config_echo(cfg);
    return r;
}

inline std::string witness_string(const Witness& w) {
    std::string out;
    for (const auto& [k, v] : w) out += (out.empty() ? "" : ";") + k + "=" + format_double(v);
    return out;
}

/// Seed of the i-th independent stream derived from a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t i) {
    return base + 0x9E3779B97F4A7C15ULL * (i + 1);
}

/// sinh x - x without cancellation.
inline double sinh_minus_x(double x) {
    if (std::abs(x) > 0.1) return std::sinh(x) - x;
    const double x2 = x * x;
    return x * x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0 * (1.0 + x2 / 72.0 * (1.0 + x2 / 110.0))));
}

/// Elementary closed forms for n = 2, 3; other n use the sinh-power recursion.
inline double volume_closed_form(int n, double r) {
    if (n == 2) return 4.0 * std::numbers::pi * std::pow(std::sinh(r / 2.0), 2);
    if (n == 3) return std::numbers::pi * sinh_minus_x(2.0 * r);
    return ball_volume(Dimension(n), r);
}

} // namespace detail

inline Report run_volume_asymptotics(const ExperimentConfig& cfg) {
    auto rep = detail::start_report(cfg, {"n", "r", "volume_quadrature", "closed_form", "rel_error", "growth_ratio",
                                          "seed"});
    std::vector<double> radii;
    const double ratio = cfg.volume_r_max / cfg.volume_r_min;
    for (int i = 0; i < cfg.volume_points; ++i) {
        radii.push_back(cfg.volume_r_min * std::pow(ratio, double(i) / (cfg.volume_points - 1)));
    }
    double worst = 0.0;
    bool bracket_ok = true;
    for (int n : cfg.dims) {
        const Dimension dim(n);
        const auto g = growth_bracket(dim, radii);
        double lo = g.front();
        double hi = g.front();
        for (std::size_t i = 0; i < radii.size(); ++i) {
            const double quad = ball_volume_quadrature(dim, radii[i]);
            const double cf = detail::volume_closed_form(n, radii[i]);
            const double rel = std::abs(quad - cf) / cf;
            worst = std::max(worst, rel);
            lo = std::min(lo, g[i]);
            hi = std::max(hi, g[i]);
            rep.table.add({std::int64_t{n}, radii[i], quad, cf, rel, g[i], cfg.mc.seed});
        }
        const std::string tag = "_n" + std::to_string(n);
        rep.metrics["bracket_lo" + tag] = lo;
        rep.metrics["bracket_hi" + tag] = hi;
        rep.metrics["bracket_span" + tag] = hi / lo;
        bracket_ok = bracket_ok && lo > 0.0 && hi / lo <= 100.0;
    }
    rep.metrics["max_rel_error"] = worst;
    rep.verdicts["closed_form_ok"] = worst <= 1e-9;
    rep.verdicts["bracket_ok"] = bracket_ok;
    return rep;
}

struct BallPair {
    HPoint x;
    double r;
    HPoint y;
    double s;
};

/// Seeded ball pairs: radii in (0, max_radius], first center within 4 of the
/// origin, center distance uniform in [0, r + s).
inline std::vector<BallPair> seeded_ball_pairs(const Dimension& dim, std::size_t count, double max_radius,
                                               std::uint64_t seed) {
    CounterUniforms u(seed, 21);
    std::vector<BallPair> out;
    std::vector<double> dir(dim.n());
    for (std::size_t i = 0; i < count; ++i) {
        const double r = max_radius * (0.02 + 0.98 * u.uniform(i, 0));
        const double s = max_radius * (0.02 + 0.98 * u.uniform(i, 1));
        const double t = 4.0 * u.uniform(i, 2);
        const double d = (r + s) * u.uniform(i, 3);
        double norm2 = 0.0;
        for (int k = 0; k < dim.n(); ++k) {
            dir[k] = u.normal(i, 2 + static_cast<std::uint32_t>(k / 2), k % 2 == 1);
            norm2 += dir[k] * dir[k];
        }
        for (double& v : dir) v /= std::sqrt(norm2);
        HPoint x = axis_point(dim, t);
        HPoint y = translate_from_origin(x, radial_point(d, dir));
        out.push_back({std::move(x), r, std::move(y), s});
    }
    return out;
}

inline Report run_intersection_bound(const ExperimentConfig& cfg) {
    auto rep = detail::start_report(cfg, {"pair", "n", "d", "r", "s", "ratio", "std_error", "upper", "exact_ratio",
                                          "seed"});
    const Dimension dim(cfg.n);
    const auto pairs = seeded_ball_pairs(dim, cfg.pairs, cfg.max_radius, cfg.mc.seed);
    double worst = 0.0;
    double worst_exact = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& bp = pairs[i];
        McConfig mc = cfg.mc;
        mc.seed = detail::derive_seed(cfg.mc.seed, i);
        mc.workers = effective_workers(cfg.mc.workers);
        const auto est = intersection_bound_ratio(dim, bp.x, bp.r, bp.y, bp.s, mc);
        const double d = hdist(bp.x, bp.y);
        const double exact = intersection_volume(dim, d, bp.r, bp.s) / std::exp((cfg.n - 1) * (bp.r + bp.s - d) / 2.0);
        const double upper = est.value + 3.0 * est.std_error;
        worst = std::max(worst, upper);
        worst_exact = std::max(worst_exact, exact);
        rep.table.add({std::uint64_t{i}, std::int64_t{cfg.n}, d, bp.r, bp.s, est.value, est.std_error, upper, exact,
                       mc.seed});
    }
    rep.metrics["max_upper"] = worst;
    rep.metrics["max_exact_ratio"] = worst_exact;
    rep.metrics["bound_constant"] = cfg.bound_constant;
    rep.verdicts["bound_ok"] = worst <= cfg.bound_constant;
    return rep;
}

/// The annulus conditions at delta = theta (the verdict) plus neighbourhood
/// probes at delta = theta -/+ delta_probe (reported only).
inline Report run_weight_conditions(const ExperimentConfig& cfg) {
    auto rep = detail::start_report(cfg, {"condition", "role", "theta", "delta", "sup_ratio", "growth", "verdict",
                                          "witness", "j_max", "r_max", "samples_per_annulus", "seed"});
    const auto tr = cfg.triple();
    const Dimension dim(cfg.n);
    AnnulusGrid grid = cfg.annulus;
    grid.seed = cfg.mc.seed;
    bool all_bounded = true;
    auto run = [&](const char* cond, double theta, double delta, bool probe) {
        const auto w = WeightSpec::power_volume(dim, theta, tr.q);
        const bool first = std::string(cond) == "cj";
        if (probe && !(delta < (first ? tr.delta_bound() : 1.0))) return;
        const auto r = first ? cond_cj_check(w, tr, delta, grid) : cond_cj2_check(w, tr, delta, grid);
        rep.table.add({std::string(cond), std::string(probe ? "probe" : "check"), theta, delta, r.sup_ratio, r.growth,
                       std::string(to_string(r.verdict)), detail::witness_string(r.witness), std::int64_t{grid.j_max},
                       std::int64_t{grid.r_max}, std::int64_t{grid.samples}, cfg.mc.seed});
        if (probe) return;
        all_bounded = all_bounded && r.verdict == Verdict::bounded;
        if (r.verdict == Verdict::inconclusive) {
            rep.notes.push_back(std::string(cond) + " theta=" + format_double(theta) + " growth " +
                                format_double(r.growth));
        }
    };
    auto sweep = [&](const char* cond, const std::vector<double>& thetas) {
        for (double th : thetas) {
            run(cond, th, th, false);
            if (cfg.delta_probe > 0.0) {
                run(cond, th, th - cfg.delta_probe, true);
                run(cond, th, th + cfg.delta_probe, true);
            }
        }
    };
    sweep("cj", cfg.cj_thetas);
    sweep("cj2", cfg.cj2_thetas);
    rep.verdicts["all_bounded"] = all_bounded;
    return rep;
}

namespace detail {

inline void add_riesz_rows(Report& rep, const RieszScan& scan, std::uint64_t seed) {
    for (const auto& row : scan.rows) {
        rep.table.add({std::string("riesz"), std::string("strong"), row.R, row.strong, seed});
        rep.table.add({std::string("riesz"), std::string("weak"), row.R, row.weak, seed});
        rep.table.add({std::string("riesz"), std::string("input"), row.R, row.input, seed});
    }
    rep.metrics["strong_exponent"] = scan.strong_exponent;
    rep.metrics["strong_ratio"] = scan.strong_ratio;
    rep.metrics["strong_spread"] = scan.strong_spread;
    rep.metrics["weak_spread"] = scan.weak_spread;
}

inline void add_condition_rows(Report& rep, const char* section, const ConditionReport& r, std::uint64_t seed) {
    rep.table.add({std::string(section), std::string("sup_ratio"), 0.0, r.sup_ratio, seed});
    rep.table.add({std::string(section), std::string("growth"), 0.0, r.growth, seed});
    rep.metrics[std::string(section) + "_sup"] = r.sup_ratio;
    rep.metrics[std::string(section) + "_growth"] = r.growth;
    if (r.verdict == Verdict::inconclusive) {
        rep.notes.push_back(std::string(section) + ": sup grew by " + format_double(r.growth) + " on doubling");
    }
}

inline RieszScan example_scan(const ExperimentConfig& cfg, const WeightSpec& w, const ExponentTriple& tr) {
    RieszOptions opt;
    opt.grid = cfg.grid;
    opt.t_step = cfg.t_step;
    return riesz_divergence_scan(RadialProfile::indicator(1.0), w, tr, cfg.R_list, opt);
}

/// Slope k of log M_alpha f against log w over t in [5, 20]: M_alpha f ~ w^k.
inline std::optional<double> pointwise_exponent(const RieszScan& scan, const WeightSpec& w) {
    std::vector<double> lw;
    std::vector<double> lm;
    for (std::size_t i = 0; i < scan.t_nodes.size(); ++i) {
        const double t = scan.t_nodes[i];
        if (t < 5.0 || t > 20.0 || !(scan.maximal_values[i] > 0.0)) continue;
        lw.push_back(std::log(w.at(t)));
        lm.push_back(std::log(scan.maximal_values[i]));
    }
    if (lw.size() < 2 || lw.front() == lw.back()) return std::nullopt;
    const double mx = std::accumulate(lw.begin(), lw.end(), 0.0) / lw.size();
    const double my = std::accumulate(lm.begin(), lm.end(), 0.0) / lm.size();
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < lw.size(); ++i) {
        sxy += (lw[i] - mx) * (lm[i] - my);
        sxx += (lw[i] - mx) * (lw[i] - mx);
    }
    return sxy / sxx;
}

} // namespace detail

/// Weak type holds, strong type fails: the second annulus condition at
/// delta = theta, the local A_{p,q} sup and the Riesz scan of chi_{B(0,1)}.
inline Report run_example_i(const ExperimentConfig& cfg) {
    auto rep = detail::start_report(cfg, {"section", "quantity", "R", "value", "seed"});
    const auto tr = cfg.triple();
    const Dimension dim(cfg.n);
    const double theta = cfg.theta();
    const auto w = cfg.weight_spec();
    AnnulusGrid grid = cfg.annulus;
    grid.seed = cfg.mc.seed;

    bool cj2_ok = true;
    if (theta < 1.0) {
        const auto cj2 = cond_cj2_check(w, tr, theta, grid);
        detail::add_condition_rows(rep, "cj2", cj2, cfg.mc.seed);
        cj2_ok = cj2.verdict == Verdict::bounded;
    }
    rep.metrics["cj2_applicable"] = theta < 1.0 ? 1.0 : 0.0;
    const auto balls = local_ball_grid(dim, cfg.local_t_max);
    const auto loc = apq_loc_sup(w, tr, balls);
    detail::add_condition_rows(rep, "apq_loc", loc, cfg.mc.seed);

    const auto scan = detail::example_scan(cfg, w, tr);
    detail::add_riesz_rows(rep, scan, cfg.mc.seed);
    if (auto k = detail::pointwise_exponent(scan, w)) rep.metrics["pointwise_exponent"] = *k;
    rep.metrics["theta"] = theta;
    rep.verdicts["weak_ok"] = cj2_ok && scan.weak_stable();
    rep.verdicts["strong_diverges"] = scan.strong_diverges();
    return rep;
}

/// Strong type holds, w_theta is not A_{p,q}: the first annulus condition at
/// delta = theta, the global A_{p,q} scan and the Riesz scan.
inline Report run_example_ii(const ExperimentConfig& cfg) {
    const auto tr = cfg.triple();
    const double theta = cfg.theta();
    if (!(theta > 0.5 && theta < tr.delta_bound())) {
        throw RangeError("example_ii: theta must lie in (1/2, " + format_double(tr.delta_bound()) + ")");
    }
    auto rep = detail::start_report(cfg, {"section", "quantity", "R", "value", "seed"});
    const auto w = cfg.weight_spec();
    AnnulusGrid grid = cfg.annulus;
    grid.seed = cfg.mc.seed;

    const auto cj = cond_cj_check(w, tr, theta, grid);
    detail::add_condition_rows(rep, "cj", cj, cfg.mc.seed);
    const auto global = apq_global_scan(w, tr, cfg.global_R);
    for (const auto& g : global) {
        rep.table.add({std::string("global"), std::string("centered"), g.R, g.centered, cfg.mc.seed});
        rep.table.add({std::string("global"), std::string("sup_product"), g.R, g.sup_product, cfg.mc.seed});
        rep.table.add({std::string("global"), std::string("best_offset"), g.R, g.best_offset, cfg.mc.seed});
    }
    rep.metrics["global_ratio"] = global.back().sup_product / global.front().sup_product;
    const auto scan = detail::example_scan(cfg, w, tr);
    detail::add_riesz_rows(rep, scan, cfg.mc.seed);
    rep.metrics["theta"] = theta;
    rep.verdicts["strong_ok"] = cj.verdict == Verdict::bounded && scan.strong_stable();
    rep.verdicts["not_Apq"] = global_scan_verdict(global) == Verdict::diverging;
    return rep;
}

inline Report run_lemma_diag(const ExperimentConfig& cfg) {
    auto rep = detail::start_report(cfg, {"r", "min_constant", "lambda_at_max", "failure", "epsilon", "eta", "theta",
                                          "delta", "beta", "gamma", "seed"});
    const auto tr = cfg.triple();
    const double theta = cfg.theta();
    const auto bg = params_weak_only(tr, cfg.delta_value());
    LemmaOptions opt;
    opt.epsilon = cfg.epsilon;
    opt.eta = cfg.eta;
    const double eta = opt.eta_for(Dimension(cfg.n));
    const auto rows = lemma21_scan(RadialProfile::indicator(1.0), cfg.weight_spec(), tr, bg, cfg.lemma_r, opt,
                                   cfg.lambda_points);
    bool bounded = !rows.empty() && rows.front().min_constant > 0.0;
    bool no_failure = true;
    for (const auto& row : rows) {
        rep.table.add({std::int64_t{row.r}, row.min_constant, row.lambda_at_max, std::int64_t{row.failure},
                       cfg.epsilon, eta, theta, cfg.delta_value(), bg.beta, bg.gamma, cfg.mc.seed});
        bounded = bounded && row.min_constant < 10.0 * rows.front().min_constant;
        no_failure = no_failure && !row.failure;
    }
    double hi = 0.0;
    for (const auto& row : rows) hi = std::max(hi, row.min_constant);
    rep.metrics["max_min_constant"] = hi;
    if (!rows.empty()) rep.metrics["first_min_constant"] = rows.front().min_constant;
    rep.verdicts["bounded"] = bounded;
    rep.verdicts["no_failure"] = no_failure;
    return rep;
}

inline Report run_testing_condition(const ExperimentConfig& cfg) {
    auto rep = detail::start_report(cfg, {"pairs", "doubled_pairs", "sup_ratio", "growth", "verdict", "witness",
                                          "set_radius", "theta", "delta", "beta", "gamma", "seed"});
    const auto tr = cfg.triple();
    const auto bg = params_weak_only(tr, cfg.delta_value());
    TestingSweep sw = cfg.sweep;
    sw.seed = cfg.mc.seed;
    const auto r = testing_condition_sweep(cfg.weight_spec(), tr, bg, sw);
    rep.table.add({std::uint64_t{sw.pairs}, std::uint64_t{2 * sw.pairs}, r.sup_ratio, r.growth,
                   std::string(to_string(r.verdict)), detail::witness_string(r.witness), sw.set_radius, cfg.theta(),
                   cfg.delta_value(), bg.beta, bg.gamma, cfg.mc.seed});
    rep.metrics["sup_ratio"] = r.sup_ratio;
    rep.metrics["growth"] = r.growth;
    if (r.verdict == Verdict::inconclusive) rep.notes.push_back("testing: growth " + format_double(r.growth));
    rep.verdicts["stabilizes"] = r.verdict == Verdict::bounded;
    return rep;
}

inline Report run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    switch (cfg.experiment) {
    case Experiment::volume_asymptotics: return run_volume_asymptotics(cfg);
    case Experiment::intersection_bound: return run_intersection_bound(cfg);
    case Experiment::weight_conditions: return run_weight_conditions(cfg);
    case Experiment::example_i: return run_example_i(cfg);
    case Experiment::example_ii: return run_example_ii(cfg);
    case Experiment::lemma_diag: return run_lemma_diag(cfg);
    case Experiment::testing_condition: return run_testing_condition(cfg);
    }
    throw ConfigError("unknown experiment");
}

/// Experiment name -> verdict name -> expected value.
using Expectations = std::map<std::string, std::map<std::string, bool>>;

inline Expectations expectations_from_json(const nlohmann::json& j, const std::string& where) {
    detail::ObjectReader rd(j, where);
    detail::check_schema(rd, where);
    Expectations out;
    for (const auto& item : j.items()) {
        if (item.key() == "schema_version") continue;
        rd.sub(item.key().c_str());
        try {
            out[item.key()] = item.value().get<std::map<std::string, bool>>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(where + "." + item.key() + ": " + e.what());
        }
    }
    rd.finish();
    return out;
}

struct SuiteManifest {
    std::vector<ExperimentConfig> experiments;
    Expectations expected;
    std::string output;
};

/// {"schema_version": 1, "expected": path | object, "output": dir, "experiments": [config, ...]}.
/// Relative paths are resolved against `base`.
inline SuiteManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base,
                                        const std::string& where) {
    detail::ObjectReader rd(j, where);
    detail::check_schema(rd, where);
    SuiteManifest m;
    if (rd.has("expected")) {
        const auto& e = rd.sub("expected");
        if (e.is_string()) {
            const auto path = base / e.get<std::string>();
            m.expected = expectations_from_json(read_json_file(path), path.string());
        } else {
            m.expected = expectations_from_json(e, where + ".expected");
        }
    }
    rd.get("output", m.output);
    if (!m.output.empty()) m.output = (base / m.output).lexically_normal().string();
    if (rd.has("experiments")) {
        const auto& list = rd.sub("experiments");
        if (!list.is_array()) throw ConfigError(where + ".experiments: expected an array");
        std::set<std::string> names;
        for (std::size_t i = 0; i < list.size(); ++i) {
            auto cfg = config_from_json(list[i], where + ".experiments[" + std::to_string(i) + "]");
            if (!names.insert(cfg.name).second) throw ConfigError(where + ": duplicate name '" + cfg.name + "'");
            m.experiments.push_back(std::move(cfg));
        }
    }
    rd.finish();
    return m;
}

inline SuiteManifest load_manifest(const std::filesystem::path& path) {
    return manifest_from_json(read_json_file(path), path.parent_path(), path.string());
}

struct SuiteOptions {
    /// Overrides every experiment's worker count when set.
    std::optional<unsigned> workers;
    /// Overrides the manifest's output directory when non-empty.
    std::string output;
    Format format = Format::both;
    /// Run experiments concurrently.
    bool parallel = false;
    /// Progress lines (one per experiment); null silences them.
    std::ostream* log = nullptr;
};

struct SuiteResult {
    int exit_code = 0;
    std::vector<Report> reports;
    std::vector<std::string> messages;
};

namespace detail {

struct Outcome {
    std::optional<Report> report;
    int code = 0;
    std::string message;
};

inline Outcome run_guarded(const ExperimentConfig& cfg) {
    Outcome o;
    try {
        o.report = run_experiment(cfg);
    } catch (const NumericalError& e) {
        o.code = 3;
        o.message = cfg.name + ": numerical failure: " + e.what();
    } catch (const Error& e) {
        o.code = 2;
        o.message = cfg.name + ": " + e.what();
    }
    return o;
}

} // namespace detail

/// Runs every experiment, writes one CSV and one JSON per experiment and
/// compares verdicts with the expectation table. Exit code: 0 all verdicts as
/// expected, 1 some mismatch or inconclusive, 2 config or IO error, 3 numerical failure.
inline SuiteResult run_suite(const SuiteManifest& m, const SuiteOptions& opt = {}) {
    SuiteResult res;
    std::vector<ExperimentConfig> cfgs = m.experiments;
    for (auto& c : cfgs) {
        if (opt.workers) c.mc.workers = *opt.workers;
        c.mc.workers = effective_workers(c.mc.workers);
    }
    std::vector<detail::Outcome> outcomes(cfgs.size());
    if (opt.parallel) {
        std::vector<std::future<detail::Outcome>> futs;
        for (const auto& c : cfgs) futs.push_back(std::async(std::launch::async, detail::run_guarded, c));
        for (std::size_t i = 0; i < futs.size(); ++i) outcomes[i] = futs[i].get();
    } else {
        for (std::size_t i = 0; i < cfgs.size(); ++i) {
            outcomes[i] = detail::run_guarded(cfgs[i]);
            if (opt.log) *opt.log << "[" << (i + 1) << "/" << cfgs.size() << "] " << cfgs[i].name << std::endl;
        }
    }
    const std::string out_dir = opt.output.empty() ? m.output : opt.output;
    bool mismatch = false;
    int worst = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        auto& o = outcomes[i];
        if (!o.report) {
            worst = std::max(worst, o.code);
            res.messages.push_back(o.message);
            continue;
        }
        const Report& r = *o.report;
        if (!out_dir.empty()) {
            try {
                write_report(r, out_dir, opt.format);
            } catch (const IoError& e) {
                worst = std::max(worst, 2);
                res.messages.push_back(e.what());
            }
        }
        for (const auto& note : r.notes) {
            mismatch = true;
            res.messages.push_back(r.name + ": inconclusive: " + note);
        }
        auto it = m.expected.find(r.name);
        if (it == m.expected.end()) {
            mismatch = true;
            res.messages.push_back(r.name + ": no expected verdicts");
        } else {
            for (const auto& [key, want] : it->second) {
                auto got = r.verdicts.find(key);
                if (got == r.verdicts.end()) {
                    mismatch = true;
                    res.messages.push_back(r.name + ": verdict '" + key + "' not produced");
                } else if (got->second != want) {
                    mismatch = true;
                    res.messages.push_back(r.name + ": " + key + " = " + (got->second ? "true" : "false") +
                                           ", expected " + (want ? "true" : "false"));
                }
            }
        }
        res.reports.push_back(std::move(*o.report));
    }
    res.exit_code = worst == 3 ? 3 : worst == 2 ? 2 : mismatch ? 1 : 0;
    return res;
}

} // namespace hypmax
