// hypmax: command-line front end for the experiments.

#include "hypmax/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

using namespace hypmax;

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<int> n;
    std::optional<double> alpha;
    std::optional<double> p;
    std::optional<double> theta;
    std::optional<double> rmax;
    std::optional<std::uint64_t> samples;
    std::optional<unsigned> workers;
    std::string format;
    bool parallel = false;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON config file");
    sub->add_option("--seed", f.seed, "base seed");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--workers", f.workers, "worker threads (capped by HYPMAX_THREADS)");
    sub->add_option("--format", f.format, "output format")->check(CLI::IsMember({"csv", "json"}));
}

void add_model(CLI::App* sub, Flags& f) {
    sub->add_option("--n", f.n, "dimension");
    sub->add_option("--alpha", f.alpha, "fractional order");
    sub->add_option("--p", f.p, "exponent p (q follows from 1/q = 1/p - alpha/n)");
    sub->add_option("--theta", f.theta, "weight exponent of w_theta");
    sub->add_option("--rmax", f.rmax, "largest radius");
    sub->add_option("--samples", f.samples, "Monte Carlo samples");
}

Format output_format(const std::string& s) {
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    return Format::both;
}

ExperimentConfig build_config(Experiment e, const Flags& f) {
    ExperimentConfig cfg = default_config(e);
    if (!f.config.empty()) {
        const auto j = read_json_file(f.config);
        if (j.is_object() && j.contains("experiment") && j["experiment"] != to_string(e)) {
            throw ConfigError(f.config + ": experiment does not match the subcommand");
        }
        apply_config_json(cfg, j, f.config);
    }
    if (f.seed) cfg.mc.seed = *f.seed;
    if (f.workers) cfg.mc.workers = *f.workers;
    if (!f.out.empty()) cfg.output = f.out;
    if (f.n) {
        cfg.n = *f.n;
        cfg.dims = {*f.n};
    }
    if (f.alpha) cfg.alpha = *f.alpha;
    if (f.p) cfg.p = *f.p;
    if (f.theta) {
        if (e == Experiment::weight_conditions) {
            cfg.cj_thetas = {*f.theta};
            cfg.cj2_thetas = {*f.theta};
        } else {
            cfg.weight.kind = "power_volume";
            cfg.weight.theta = *f.theta;
        }
    }
    if (f.rmax) {
        if (e == Experiment::volume_asymptotics) {
            cfg.volume_r_max = *f.rmax;
        } else if (e == Experiment::weight_conditions) {
            cfg.annulus.r_max = static_cast<int>(*f.rmax);
        } else {
            cfg.grid.r_max = *f.rmax;
        }
    }
    if (f.samples) {
        if (e == Experiment::weight_conditions) {
            cfg.annulus.samples = static_cast<int>(*f.samples);
        } else {
            cfg.mc.samples = *f.samples;
        }
    }
    cfg.mc.workers = effective_workers(cfg.mc.workers);
    cfg.validate();
    return cfg;
}

void print_summary(const Report& r) {
    std::printf("%s (%s)\n", r.name.c_str(), r.experiment.c_str());
    for (const auto& [k, v] : r.metrics) std::printf("  %-22s %.10g\n", k.c_str(), v);
    for (const auto& [k, v] : r.verdicts) std::printf("  %-22s %s\n", k.c_str(), v ? "true" : "false");
    for (const auto& n : r.notes) std::printf("  inconclusive: %s\n", n.c_str());
}

int run_single(Experiment e, const Flags& f) {
    const auto cfg = build_config(e, f);
    const auto rep = run_experiment(cfg);
    print_summary(rep);
    if (!cfg.output.empty()) {
        for (const auto& path : write_report(rep, cfg.output, output_format(f.format))) {
            std::printf("wrote %s\n", path.string().c_str());
        }
    }
    return rep.inconclusive() ? 1 : 0;
}

int run_suite_cmd(const Flags& f) {
    if (f.config.empty()) throw ConfigError("suite: --config <manifest> is required");
    auto manifest = load_manifest(f.config);
    if (f.seed) {
        for (auto& c : manifest.experiments) c.mc.seed = *f.seed;
    }
    SuiteOptions opt;
    opt.workers = f.workers;
    opt.output = f.out;
    opt.format = output_format(f.format);
    opt.parallel = f.parallel;
    opt.log = &std::cerr;
    const auto res = run_suite(manifest, opt);
    for (const auto& r : res.reports) print_summary(r);
    for (const auto& m : res.messages) std::fprintf(stderr, "%s\n", m.c_str());
    std::printf("suite: %zu reports, exit %d\n", res.reports.size(), res.exit_code);
    return res.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fractional maximal operators on hyperbolic space: weighted-norm experiments"};
    app.require_subcommand(1);
    Flags f;
    const std::pair<const char*, Experiment> singles[] = {
        {"volume", Experiment::volume_asymptotics},     {"intersect", Experiment::intersection_bound},
        {"check-weight", Experiment::weight_conditions}, {"example-i", Experiment::example_i},
        {"example-ii", Experiment::example_ii},          {"lemma", Experiment::lemma_diag},
        {"testcond", Experiment::testing_condition},
    };
    std::vector<std::pair<CLI::App*, Experiment>> subs;
    for (const auto& [name, e] : singles) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + to_string(e) + " experiment");
        add_common(sub, f);
        add_model(sub, f);
        subs.emplace_back(sub, e);
    }
    auto* suite = app.add_subcommand("suite", "run every experiment of a manifest and check verdicts");
    add_common(suite, f);
    suite->add_flag("--parallel", f.parallel, "run experiments concurrently");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        if (suite->parsed()) return run_suite_cmd(f);
        for (const auto& [sub, e] : subs) {
            if (sub->parsed()) return run_single(e, f);
        }
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
