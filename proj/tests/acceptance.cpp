// Acceptance run: one PASS/FAIL line per criterion.

#include "hypmax/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

using namespace hypmax;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const Report* find(const SuiteResult& res, const std::string& name) {
    for (const auto& r : res.reports) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

double metric(const Report& r, const std::string& key) {
    auto it = r.metrics.find(key);
    return it == r.metrics.end() ? std::nan("") : it->second;
}

std::size_t column(const Table& t, const std::string& name) {
    const auto& c = t.columns();
    return static_cast<std::size_t>(std::find(c.begin(), c.end(), name) - c.begin());
}

std::string text(const Cell& c) { return format_cell(c); }

double number(const Cell& c) { return std::get<double>(c); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double v2(double r) { return 2.0 * std::numbers::pi * (std::cosh(r) - 1.0); }

HPoint seeded_point(const Dimension& dim, double t, std::uint64_t seed) {
    CounterUniforms u(seed, 1);
    std::vector<double> dir(dim.n());
    double norm2 = 0.0;
    for (int k = 0; k < dim.n(); ++k) {
        dir[k] = u.normal(0, static_cast<std::uint32_t>(k / 2), k % 2 == 1);
        norm2 += dir[k] * dir[k];
    }
    for (double& v : dir) v /= std::sqrt(norm2);
    return radial_point(t, dir);
}

void criterion1(const Report* r) {
    if (!r) return verdict(1, false, "no volume report");
    const double err = metric(*r, "max_rel_error");
    bool ok = err <= 1e-9;
    std::string d = fmt("closed-form rel error %.3g (<= 1e-9)", err);
    for (const char* n : {"n2", "n3"}) {
        const double lo = metric(*r, std::string("bracket_lo_") + n);
        const double hi = metric(*r, std::string("bracket_hi_") + n);
        ok = ok && lo > 0.0 && hi / lo <= 100.0;
        d += fmt("; %s bracket [%.4g, %.4g] span %.4g (<= 100)", n, lo, hi, hi / lo);
    }
    verdict(1, ok, d);
}

void criterion2(const Report* r) {
    if (!r) return verdict(2, false, "no intersection report");
    const double upper = metric(*r, "max_upper");
    verdict(2, upper <= kIntersectionBound && r->table.rows().size() == 100,
            fmt("%zu pairs, max ratio + 3 sigma %.4f <= C = %.1f", r->table.rows().size(), upper, kIntersectionBound));
}

void criterion3() {
    const Dimension d2(2);
    RadiusGrid grid;
    double worst_center = 0.0;
    for (double rho : {0.5, 1.0, 2.0}) {
        auto f = ScalarField::radial(RadialProfile::indicator(rho));
        const double m = maximal(d2, 1.0, f, HPoint::origin(d2), grid, Engine::quad).value;
        worst_center = std::max(worst_center, std::abs(m - std::sqrt(v2(rho))));
    }
    int sandwich_bad = 0;
    for (std::uint64_t k = 0; k < 50; ++k) {
        CounterUniforms u(77, 2);
        const double rho = 0.3 + 3.0 * u.uniform(k, 0);
        const double t = 6.0 * u.uniform(k, 1);
        const auto prof = k % 2 ? RadialProfile::indicator(rho, 0.5 + u.uniform(k, 2))
                                : RadialProfile::shells({{rho / 3, rho}}, 1.0 + u.uniform(k, 2));
        const auto s = maximal_split(d2, 1.0, ScalarField::radial(prof), seeded_point(d2, t, k), grid, Engine::quad);
        if (!(std::max(s.local.value, s.far.value) <= s.combined.value &&
              s.combined.value <= s.local.value + s.far.value)) {
            ++sandwich_bad;
        }
    }
    int mc_bad = 0;
    for (std::uint64_t k = 0; k < 20; ++k) {
        CounterUniforms u(2024, 5);
        const Dimension dim(2 + static_cast<int>(k % 2));
        const double t = 3.0 * u.uniform(k, 0);
        const double r = 0.2 + 2.5 * u.uniform(k, 1);
        const double rho = 0.5 + 2.0 * u.uniform(k, 2);
        auto prof = RadialProfile::tabulate([rho](double s) { return std::max(0.0, 1.0 - s / rho) + 0.1; },
                                            {0.0, rho / 2, rho}, Interp::linear, rho);
        auto f = ScalarField::radial(prof);
        const auto x = seeded_point(dim, t, k);
        const double quad = avg_fractional(dim, 1.0, f, x, r, Engine::quad);
        const auto mc = avg_fractional_estimate(dim, 1.0, f, x, r, Engine::mc, McConfig{100 + k, 100000, 1});
        if (!(std::abs(quad - mc.value) <= 3.0 * mc.std_error)) ++mc_bad;
    }
    verdict(3, worst_center <= 1e-6 && sandwich_bad == 0 && mc_bad == 0,
            fmt("centered indicator max error %.3g (<= 1e-6); sandwich violations %d/50; quad-vs-MC beyond 3 sigma %d/20",
                worst_center, sandwich_bad, mc_bad));
}

void criterion4() {
    CounterUniforms u(9, 4);
    int bad = 0;
    for (std::uint64_t k = 0; k < 100; ++k) {
        const int n = 2 + static_cast<int>(3 * u.uniform(k, 0));
        const double alpha = n * (0.05 + 0.9 * u.uniform(k, 1));
        const bool one = k % 5 == 0;
        const double p = one ? 1.0 : 1.0 + (n / alpha - 1.0) * 0.98 * u.uniform(k, 2);
        const auto tr = ExponentTriple::from_p(n, alpha, p);
        const double delta = tr.delta_bound() - 0.01 - 3.0 * u.uniform(k, 3);
        const auto bg = params_from_delta(tr, delta);
        const bool equal = std::abs(bg.beta - bg.gamma) <= 1e-12;
        const bool ok = bg.beta > 0.0 && bg.beta < 1.0 && (bg.beta <= bg.gamma || equal) && bg.gamma < tr.p &&
                        equal == one;
        if (!ok) ++bad;
    }
    verdict(4, bad == 0, fmt("violations on the 100-point admissible grid: %d", bad));
}

void criterion5(const Report* r) {
    if (!r) return verdict(5, false, "no weight_conditions report");
    const auto& t = r->table;
    const auto c_cond = column(t, "condition"), c_role = column(t, "role"), c_theta = column(t, "theta"),
               c_growth = column(t, "growth"), c_verdict = column(t, "verdict");
    int checks = 0, bounded = 0;
    double worst = 0.0;
    std::string list;
    for (const auto& row : t.rows()) {
        if (text(row[c_role]) != "check") continue;
        ++checks;
        const double g = number(row[c_growth]);
        worst = std::max(worst, g);
        const bool ok = text(row[c_verdict]) == "bounded" && g < kStableGrowth;
        bounded += ok;
        list += fmt(" %s(%.3g)%s", text(row[c_cond]).c_str(), number(row[c_theta]), ok ? "" : "!");
    }
    verdict(5, checks == 8 && bounded == checks,
            fmt("%d/%d checks bounded, max sup growth on doubling %.3g (< 0.05):%s", bounded, checks, worst,
                list.c_str()));
}

void criterion6(const Report* r) {
    if (!r) return verdict(6, false, "no example_i report");
    const double weak = metric(*r, "weak_spread");
    const double e = metric(*r, "strong_exponent");
    const double ratio = metric(*r, "strong_ratio");
    const bool ok = weak < 2.0 && std::abs(e - 0.25) <= 0.2 * 0.25 && ratio >= 1.3;
    verdict(6, ok,
            fmt("weak spread %.5g (< 2); strong exponent %.4f (0.25 +/- 20%%); strong(40)/strong(10) %.4f (>= 1.3)",
                weak, e, ratio));
}

void criterion7(const Report* r) {
    if (!r) return verdict(7, false, "no example_ii report");
    const double spread = metric(*r, "strong_spread");
    const auto& t = r->table;
    const auto c_sec = column(t, "section"), c_q = column(t, "quantity"), c_R = column(t, "R"),
               c_v = column(t, "value");
    double at5 = std::nan(""), at30 = std::nan(""), prev = 0.0;
    bool monotone = true;
    for (const auto& row : t.rows()) {
        if (text(row[c_sec]) != "global" || text(row[c_q]) != "sup_product") continue;
        const double R = number(row[c_R]), v = number(row[c_v]);
        monotone = monotone && v > prev;
        prev = v;
        if (R == 5.0) at5 = v;
        if (R == 30.0) at30 = v;
    }
    const bool ok = spread < 1.2 && at30 > 10.0 * at5 && monotone;
    verdict(7, ok,
            fmt("strong spread %.6g (< 1.2); A_pq product R=30 / R=5 = %.4g (> 10), monotone %s", spread, at30 / at5,
                monotone ? "yes" : "no"));
}

void criterion8(const Report* r) {
    if (!r) return verdict(8, false, "no testing_condition report");
    const double g = metric(*r, "growth");
    verdict(8, g < kStableGrowth && r->verdicts.at("stabilizes"),
            fmt("sup ratio %.6g, growth on doubling the family %.3g (< 0.05)", metric(*r, "sup_ratio"), g));
}

void criterion9(const Report* r) {
    if (!r) return verdict(9, false, "no lemma_diag report");
    const double first = metric(*r, "first_min_constant");
    const double hi = metric(*r, "max_min_constant");
    verdict(9, first > 0.0 && hi < 10.0 * first && r->verdicts.at("no_failure"),
            fmt("min_constant at r=2 %.5g, max over r=2..8 %.5g (< 10x), ratio %.4f", first, hi, hi / first));
}

void criterion10(const fs::path& a, const fs::path& b, const SuiteResult& ra, const SuiteResult& rb) {
    int files = 0, differ = 0;
    for (const auto& r : ra.reports) {
        const auto name = r.name + ".csv";
        ++files;
        if (!fs::exists(b / name) || slurp(a / name) != slurp(b / name)) ++differ;
    }
    verdict(10, files > 0 && differ == 0 && ra.reports.size() == rb.reports.size(),
            fmt("%d CSV files compared between 1 worker and 4 workers (parallel suite); %d differ", files, differ));
}

} // namespace

int main() {
    try {
        const fs::path manifest_path = fs::path(HYPMAX_SOURCE_DIR) / "configs" / "default_suite.json";
        const auto manifest = load_manifest(manifest_path);
        const fs::path base = fs::temp_directory_path() / "hypmax_acceptance";
        fs::remove_all(base);

        SuiteOptions one;
        one.workers = 1;
        one.output = (base / "w1").string();
        one.format = Format::csv;
        const auto ra = run_suite(manifest, one);
        for (const auto& m : ra.messages) std::fprintf(stderr, "%s\n", m.c_str());

        criterion1(find(ra, "volume_asymptotics"));
        criterion2(find(ra, "intersection_bound"));
        criterion3();
        criterion4();
        criterion5(find(ra, "weight_conditions"));
        criterion6(find(ra, "example_i"));
        criterion7(find(ra, "example_ii"));
        criterion8(find(ra, "testing_condition"));
        criterion9(find(ra, "lemma_diag"));

        SuiteOptions four = one;
        four.workers = 4;
        four.parallel = true;
        four.output = (base / "w4").string();
        const auto rb = run_suite(manifest, four);
        criterion10(base / "w1", base / "w4", ra, rb);
    } catch (const std::exception& e) {
        std::printf("FAIL acceptance run aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
