#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "transportlab/scenario.hpp"

using namespace transportlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string minimal_json(const std::string& outputs) {
    return R"({
      "name": "smoke",
      "models": [{"label": "m", "model": {
        "link": "identity", "beta0": 20, "beta1": 10,
        "gamma": {"B": 10, "C": 5}, "beta2": {"B": 2, "C": 2}}}],
      "measures": [{"kind": "mean_difference", "estimand": "marginal"}],
      "outputs": ")" + outputs + R"("
    })";
}

}  // namespace

TEST_CASE("parse errors carry field paths") {
    CHECK_THROWS_WITH_AS(parse_scenario("{not json"),
                         doctest::Contains("malformed JSON"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_scenario("{}"), doctest::Contains("name"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_scenario(R"({"name":"x","models":[{"label":"m","model":
            {"link":"probit","beta0":0,"beta1":0}}]})"),
        doctest::Contains("models[0].model.link"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_scenario(R"({"name":"x","mode":"psychic"})"),
        doctest::Contains("mode"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_scenario(R"({"name":"x","extra_checks":["b9"]})"),
        doctest::Contains("unknown check"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_scenario(
            R"({"name":"x","measures":[{"kind":"mean_difference","estimand":"marginal"}]})"),
        doctest::Contains("model"), ConfigError);
}

TEST_CASE("defaults are applied") {
    const ScenarioConfig config = parse_scenario(minimal_json("out/x"));
    CHECK(config.grid.populations.size() == 21);
    CHECK(config.grid.comparator_index == 10);
    CHECK(config.index_population.mean() == doctest::Approx(0.0));
    CHECK(config.n_per_population == 100000);
    CHECK(config.mode == PipelineMode::truth_quadrature);
    CHECK(config.mechanism == Mechanism::gcomp);
}

TEST_CASE("JSON round trip preserves the scenario") {
    for (const auto& bundled : bundled_scenarios()) {
        const ScenarioConfig original = bundled_scenario(bundled.name);
        const ScenarioConfig reparsed =
            parse_scenario(scenario_to_json(original));
        CHECK(reparsed.name == original.name);
        CHECK(reparsed.models.size() == original.models.size());
        CHECK(reparsed.measures.size() == original.measures.size());
        CHECK(reparsed.extra_checks == original.extra_checks);
        CHECK(reparsed.grid.populations.size() ==
              original.grid.populations.size());
        for (std::size_t i = 0; i < original.models.size(); ++i) {
            CHECK(reparsed.models[i].label == original.models[i].label);
            CHECK(reparsed.models[i].model.link == original.models[i].model.link);
            CHECK(reparsed.models[i].model.beta0 ==
                  original.models[i].model.beta0);
        }
        // Serializing the reparsed config must be a fixed point.
        CHECK(scenario_to_json(reparsed) == scenario_to_json(original));
    }
}

TEST_CASE("bundled registry is consistent") {
    CHECK(bundled_scenarios().size() == 12);
    for (const auto& bundled : bundled_scenarios())
        CHECK(bundled_scenario(bundled.name).name == bundled.name);
    CHECK_THROWS_AS(bundled_scenario("fig99"), ConfigError);
}

TEST_CASE("incompatible measure/link pairs fail validation") {
    ScenarioConfig config = parse_scenario(minimal_json("out/x"));
    config.measures[0] =
        EffectMeasure(MeasureKind::log_odds_ratio, EstimandKind::marginal);
    CHECK_THROWS_AS(validate_scenario(config), std::invalid_argument);
}

TEST_CASE("run writes artifacts and reruns are byte identical") {
    const fs::path dir = fs::temp_directory_path() / "transportlab_test_run";
    fs::remove_all(dir);
    const ScenarioConfig config = parse_scenario(minimal_json(dir.string()));
    const ScenarioResult first = run_scenario(config);
    CHECK(first.all_ok);
    REQUIRE(first.artifacts.size() >= 3);
    std::vector<std::string> contents;
    for (const auto& artifact : first.artifacts) {
        CHECK(fs::exists(artifact));
        contents.push_back(slurp(artifact));
    }
    const ScenarioResult second = run_scenario(config);
    REQUIRE(second.artifacts == first.artifacts);
    for (std::size_t i = 0; i < first.artifacts.size(); ++i)
        CHECK(slurp(first.artifacts[i]) == contents[i]);
    fs::remove_all(dir);
}

TEST_CASE("a failing parse leaves no partial outputs") {
    const fs::path dir = fs::temp_directory_path() / "transportlab_test_bad";
    fs::remove_all(dir);
    const std::string bad = R"({
      "name": "bad",
      "models": [{"label": "m", "model": {
        "link": "identity", "beta0": 0, "beta1": "oops"}}],
      "outputs": ")" + dir.string() + R"("
    })";
    CHECK_THROWS_AS(parse_scenario(bad), ConfigError);
    CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("estimated-model runs emit the patient-level trial data") {
    const fs::path dir = fs::temp_directory_path() / "transportlab_test_fitted";
    fs::remove_all(dir);
    ScenarioConfig config = parse_scenario(minimal_json(dir.string()));
    config.mode = PipelineMode::estimated_model;
    config.n_per_population = 2000;
    const ScenarioResult result = run_scenario(config);
    bool found = false;
    for (const auto& artifact : result.artifacts) {
        if (artifact.find("trial_") == std::string::npos) continue;
        found = true;
        std::ifstream in(artifact);
        std::string header, columns, row;
        std::getline(in, header);
        std::getline(in, columns);
        CHECK(header.rfind("# scenario=", 0) == 0);
        CHECK(columns == "x,treatment,y");
        std::size_t rows = 0;
        while (std::getline(in, row)) ++rows;
        CHECK(rows == 2000);
    }
    CHECK(found);
    fs::remove_all(dir);
}

TEST_CASE("load_scenario resolves bundled names and files") {
    CHECK(load_scenario("fig6").name == "fig6");
    const fs::path file =
        fs::temp_directory_path() / "transportlab_scenario.json";
    std::ofstream(file) << minimal_json("out/file_scenario");
    CHECK(load_scenario(file.string()).name == "smoke");
    fs::remove(file);
    CHECK_THROWS_AS(load_scenario("/nonexistent/path.json"), ConfigError);
}

TEST_CASE("checks-only scenarios run without measures") {
    const fs::path dir = fs::temp_directory_path() / "transportlab_test_checks";
    fs::remove_all(dir);
    ScenarioConfig config = bundled_scenario("appendixB2");
    config.outputs = dir.string();
    const ScenarioResult result = run_scenario(config);
    CHECK(result.all_ok);
    REQUIRE(result.reports.size() == 1);
    CHECK(result.reports[0].status() == "PASS");
    fs::remove_all(dir);
}
