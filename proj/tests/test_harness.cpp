#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nevlab/harness.hpp"

using namespace nevlab;
using namespace nevlab::harness;

namespace {

json minimal_config_json() {
    json j;
    j["schema_version"] = 1;
    j["seed"] = 7;
    j["output_dir"] = "/tmp/nevlab_harness_test";
    j["model"] = {{"geometry", "euclidean"}, {"complex_dim", 2}};
    j["mc"] = {{"paths", 1500}, {"step_factor", 1e-3}};
    j["checks"] = {"green_identity", "xi_closed_form"};
    return j;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config round trip: parse(emit(config)) == config") {
    const ExperimentConfig cfg = parse_config(minimal_config_json());
    const json emitted = emit_config(cfg);
    const ExperimentConfig cfg2 = parse_config(emitted);
    CHECK(emit_config(cfg2) == emitted);
    CHECK(cfg2.seed == 7);
    CHECK(cfg2.mc.paths == 1500);
}

TEST_CASE("unknown keys are rejected with their path") {
    json j = minimal_config_json();
    j["model"]["colour"] = "blue";
    try {
        parse_config(j);
        FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("model.colour") != std::string::npos);
    }
    json k = minimal_config_json();
    k["quadrature"] = {{"pionts", 3}};
    CHECK_THROWS_AS(parse_config(k), std::invalid_argument);
}

TEST_CASE("type errors carry the key path") {
    json j = minimal_config_json();
    j["r_grid"] = {{"min", "tiny"}};
    try {
        parse_config(j);
        FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("r_grid.min") != std::string::npos);
    }
}

TEST_CASE("zero-path monte carlo configs are schema errors") {
    json j = minimal_config_json();
    j["mc"]["paths"] = 0;
    CHECK_THROWS_AS(parse_config(j), std::invalid_argument);
}

TEST_CASE("unsupported schema version is rejected") {
    json j = minimal_config_json();
    j["schema_version"] = 2;
    CHECK_THROWS(parse_config(j));
}

TEST_CASE("run emits CSVs with a schema-version column and a summary") {
    ExperimentConfig cfg = parse_config(minimal_config_json());
    cfg.output_dir = "/tmp/nevlab_harness_run";
    std::filesystem::remove_all(cfg.output_dir);
    const RunOutcome outcome = run(cfg);
    CHECK(outcome.all_passed);
    const std::string csv = slurp(std::filesystem::path(cfg.output_dir) / "green_identity.csv");
    CHECK(csv.rfind("schema_version,r,level,G,g_r,residual\n", 0) == 0);
    CHECK(csv.find("\n1,") != std::string::npos);
    const std::string summary = slurp(std::filesystem::path(cfg.output_dir) / "summary.json");
    const json parsed = json::parse(summary);
    CHECK(parsed.at("all_passed").get<bool>());
    CHECK(parsed.at("checks").size() == 2);
    // resolved config is embedded alongside
    const json resolved = json::parse(slurp(std::filesystem::path(cfg.output_dir) / "resolved_config.json"));
    CHECK(resolved.at("seed").get<int>() == 7);
}

TEST_CASE("equal seeds give byte-identical CSV bodies for any thread count") {
    json j = minimal_config_json();
    j["checks"] = {"green_identity", "dynkin"};
    ExperimentConfig cfg = parse_config(j);

    cfg.output_dir = "/tmp/nevlab_det_a";
    std::filesystem::remove_all(cfg.output_dir);
    setenv("NEVLAB_THREADS", "1", 1);
    run(cfg);

    cfg.output_dir = "/tmp/nevlab_det_b";
    std::filesystem::remove_all(cfg.output_dir);
    setenv("NEVLAB_THREADS", "3", 1);
    run(cfg);
    unsetenv("NEVLAB_THREADS");

    for (const char* name : {"green_identity.csv", "dynkin.csv"}) {
        const std::string a = slurp(std::filesystem::path("/tmp/nevlab_det_a") / name);
        const std::string b = slurp(std::filesystem::path("/tmp/nevlab_det_b") / name);
        REQUIRE(!a.empty());
        CHECK(a == b);
    }
}

TEST_CASE("check registry lookups") {
    CHECK_NOTHROW(find_check("fmt_residual"));
    CHECK_NOTHROW(find_check("est1"));
    CHECK_NOTHROW(find_check("dynkin"));
    CHECK_THROWS_AS(find_check("nonsense"), std::invalid_argument);
    // every registered check carries a description
    for (const auto& info : check_registry()) {
        CHECK(!info.description.empty());
        CHECK(info.fn != nullptr);
    }
}

TEST_CASE("fast registry checks run green end to end") {
    json j = minimal_config_json();
    j["checks"] = json::array();
    ExperimentConfig cfg = parse_config(j);
    CheckContext ctx{cfg, cfg.model.build(), cfg.r_grid.build()};
    for (const char* name : {"green_identity", "as_weight", "boundary_root", "xi_closed_form",
                             "xi_slope", "e_growth", "borel", "parabolicity", "volume_comparison",
                             "calculus", "est1", "est2", "fmt_residual"}) {
        const CheckInfo& info = find_check(name);
        const CheckResult res = info.fn(ctx);
        INFO(name << ": " << res.detail);
        CHECK(res.passed);
        CHECK(!res.rows.empty());
        CHECK(!res.columns.empty());
    }
}

TEST_CASE("double rendering is shortest-round-trip") {
    CHECK(render_double(0.1) == "0.1");
    CHECK(render_double(1.0) == "1");
    CHECK(render_double(1.0 / 3.0) == "0.3333333333333333");
}
