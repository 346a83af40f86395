#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "transportlab/model.hpp"
#include "transportlab/population.hpp"
#include "transportlab/propositions.hpp"
#include "transportlab/transport.hpp"

namespace transportlab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelVariant {
    std::string label;
    OutcomeModel model;
};

// Declarative description of one batch run: models, populations, measures,
// mode, and the proposition checks to attach.
struct ScenarioConfig {
    std::string name;
    std::vector<ModelVariant> models;
    PopulationGrid grid;
    PopulationSpec index_population;
    std::vector<EffectMeasure> measures;
    std::size_t n_per_population = 100000;
    std::uint64_t base_seed = 20250801;
    PipelineMode mode = PipelineMode::truth_quadrature;
    Mechanism mechanism = Mechanism::gcomp;
    // Named check bundles beyond the per-measure A1/A2 checks:
    // "b2", "b3", "tableA1", "tableA2", "classification".
    std::vector<std::string> extra_checks;
    std::string outputs = "out";
};

// JSON round trip for the scenario schema. parse_scenario throws ConfigError
// with a field path on schema violations.
ScenarioConfig parse_scenario(const std::string& json_text);
std::string scenario_to_json(const ScenarioConfig& config);

// Loads a scenario from a bundled name or a JSON file path.
ScenarioConfig load_scenario(const std::string& path_or_name);

// Non-fatal schema lints (e.g. a figure grid whose comparator mean is not 0).
std::vector<std::string> validate_scenario(const ScenarioConfig& config);

struct ScenarioResult {
    bool all_ok = false;  // no check finished with status FAIL
    std::vector<CheckReport> reports;
    std::vector<std::string> artifacts;  // files written
};

// Runs all (variant, measure) jobs, attaches the proposition checks, and
// writes effects.csv, bias.csv, propositions.json and one SVG per
// (measure, estimand) to config.outputs. Files are written only after all
// computation has finished.
ScenarioResult run_scenario(const ScenarioConfig& config);

struct BundledScenario {
    std::string name;
    std::string description;
};

const std::vector<BundledScenario>& bundled_scenarios();
ScenarioConfig bundled_scenario(const std::string& name);

}  // namespace transportlab
