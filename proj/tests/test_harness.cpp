#include <gtest/gtest.h>

#include "hypmax/harness.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace hypmax;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("hypmax_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json small_volume() {
    return json{{"schema_version", 1}, {"experiment", "volume_asymptotics"}, {"volume_points", 12}};
}

json small_intersection(const std::string& name) {
    return json{{"schema_version", 1},
                {"experiment", "intersection_bound"},
                {"name", name},
                {"pairs", 12},
                {"mc", {{"seed", 5}, {"samples", 8192}}}};
}

} // namespace

TEST(Config, RejectsUnknownKeys) {
    auto j = small_volume();
    j["volume_pionts"] = 3;
    EXPECT_THROW(config_from_json(j, "cfg"), ConfigError);
    auto k = small_volume();
    k["mc"] = {{"seed", 1}, {"sample", 10}};
    EXPECT_THROW(config_from_json(k, "cfg"), ConfigError);
}

TEST(Config, RejectsBadSchemaAndTypes) {
    auto j = small_volume();
    j["schema_version"] = 2;
    EXPECT_THROW(config_from_json(j, "cfg"), ConfigError);
    auto k = small_volume();
    k["volume_points"] = "many";
    EXPECT_THROW(config_from_json(k, "cfg"), ConfigError);
    EXPECT_THROW(config_from_json(json{{"schema_version", 1}}, "cfg"), ConfigError);
    EXPECT_THROW(config_from_json(json{{"schema_version", 1}, {"experiment", "nope"}}, "cfg"), ConfigError);
    auto bad_p = small_volume();
    bad_p["p"] = 2.0; // needs p < n/alpha
    EXPECT_THROW(config_from_json(bad_p, "cfg"), ConfigError);
}

TEST(Config, DefaultTheta) {
    EXPECT_DOUBLE_EQ(default_config(Experiment::example_i).theta(), -1.0);
    EXPECT_DOUBLE_EQ(default_config(Experiment::example_ii).theta(), 1.0);
    auto c = default_config(Experiment::example_i);
    c.weight.kind = "constant";
    EXPECT_EQ(c.theta(), 0.0);
}

TEST(Config, WorkerCapFromEnvironment) {
    ::setenv("HYPMAX_THREADS", "2", 1);
    EXPECT_EQ(effective_workers(8), 2u);
    EXPECT_EQ(effective_workers(1), 1u);
    ::unsetenv("HYPMAX_THREADS");
    EXPECT_EQ(effective_workers(0), 1u);
}

TEST(Manifest, DuplicateNamesRejected) {
    json m{{"schema_version", 1}, {"experiments", json::array({small_volume(), small_volume()})}};
    EXPECT_THROW(manifest_from_json(m, ".", "m"), ConfigError);
}

TEST(Suite, EmptyManifestExitsZero) {
    const auto dir = scratch("empty");
    SuiteManifest m = manifest_from_json(json{{"schema_version", 1}, {"experiments", json::array()}}, dir, "m");
    SuiteOptions opt;
    opt.output = dir.string();
    const auto res = run_suite(m, opt);
    EXPECT_EQ(res.exit_code, 0);
    EXPECT_TRUE(res.reports.empty());
    EXPECT_TRUE(std::filesystem::is_empty(dir));
}

TEST(Suite, ReportsAndVerdicts) {
    const auto dir = scratch("volume");
    json m{{"schema_version", 1},
           {"expected", {{"schema_version", 1}, {"volume_asymptotics", {{"closed_form_ok", true}, {"bracket_ok", true}}}}},
           {"experiments", json::array({small_volume()})}};
    SuiteOptions opt;
    opt.output = dir.string();
    const auto res = run_suite(manifest_from_json(m, dir, "m"), opt);
    EXPECT_EQ(res.exit_code, 0);
    const auto csv = slurp(dir / "volume_asymptotics.csv");
    const auto header = csv.substr(0, csv.find('\n'));
    EXPECT_NE(header.find(",seed"), std::string::npos);
    const auto rep = json::parse(slurp(dir / "volume_asymptotics.json"));
    EXPECT_EQ(rep["config"]["volume_points"], 12);
    EXPECT_FALSE(rep["config"]["mc"].contains("workers"));
    EXPECT_EQ(rep["verdicts"]["closed_form_ok"], true);
}

TEST(Suite, VerdictMismatchExitsOne) {
    json m{{"schema_version", 1},
           {"expected", {{"schema_version", 1}, {"volume_asymptotics", {{"closed_form_ok", false}}}}},
           {"experiments", json::array({small_volume()})}};
    EXPECT_EQ(run_suite(manifest_from_json(m, ".", "m")).exit_code, 1);
}

TEST(Suite, PreconditionFailureExitsTwo) {
    json cfg{{"schema_version", 1}, {"experiment", "example_ii"}, {"weight", {{"theta", 0.0}}}};
    EXPECT_THROW(run_experiment(config_from_json(cfg, "cfg")), RangeError);
    json m{{"schema_version", 1}, {"experiments", json::array({cfg})}};
    const auto res = run_suite(manifest_from_json(m, ".", "m"));
    EXPECT_EQ(res.exit_code, 2);
    ASSERT_EQ(res.messages.size(), 1u);
}

TEST(Suite, CsvIndependentOfWorkers) {
    const auto one = scratch("w1");
    const auto four = scratch("w4");
    json m{{"schema_version", 1},
           {"experiments", json::array({small_intersection("a"), small_intersection("b")})}};
    const auto manifest = manifest_from_json(m, ".", "m");
    SuiteOptions o1;
    o1.workers = 1;
    o1.output = one.string();
    SuiteOptions o4;
    o4.workers = 4;
    o4.output = four.string();
    o4.parallel = true;
    run_suite(manifest, o1);
    run_suite(manifest, o4);
    for (const char* f : {"a.csv", "b.csv", "a.json"}) {
        const auto x = slurp(one / f);
        EXPECT_FALSE(x.empty());
        EXPECT_EQ(x, slurp(four / f)) << f;
    }
}

TEST(Report, CsvFormatting) {
    Table t({"label", "x", "k"});
    t.add({std::string("a,b"), 0.1, std::int64_t{-3}});
    EXPECT_EQ(t.csv(), "label,x,k\n\"a,b\",0.10000000000000001,-3\n");
    EXPECT_THROW(t.add({std::string("nan"), std::nan(""), std::int64_t{0}}), NumericalError);
    EXPECT_THROW(t.add({std::string("short")}), Error);
}

TEST(Experiments, ExampleIAtThetaOneDoesNotDiverge) {
    auto cfg = default_config(Experiment::example_i);
    cfg.weight.theta = 1.0;
    cfg.R_list = {10.0, 20.0};
    cfg.local_t_max = 4.0;
    const auto rep = run_experiment(cfg);
    EXPECT_FALSE(rep.verdicts.at("strong_diverges"));
    EXPECT_EQ(rep.metrics.at("cj2_applicable"), 0.0);
}

TEST(Experiments, ConstantWeightTestingStabilizes) {
    auto cfg = default_config(Experiment::testing_condition);
    cfg.weight.kind = "constant";
    cfg.sweep.pairs = 10;
    cfg.sweep.radii = {1, 2, 4};
    const auto rep = run_experiment(cfg);
    EXPECT_TRUE(rep.verdicts.at("stabilizes"));
}
