#include "transportlab/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "transportlab/rng.hpp"
#include "transportlab/studies.hpp"

namespace transportlab {

namespace {

using nlohmann::ordered_json;

constexpr const char* kArtifactVersion = "1";

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

double require_number(const ordered_json& j, const std::string& path) {
    if (!j.is_number())
        throw ConfigError(path + ": expected a number");
    return j.get<double>();
}

std::string require_string(const ordered_json& j, const std::string& path) {
    if (!j.is_string())
        throw ConfigError(path + ": expected a string");
    return j.get<std::string>();
}

const ordered_json& require_field(const ordered_json& j, const std::string& key,
                                  const std::string& path) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(path + "." + key + ": missing required field");
    return j.at(key);
}

OutcomeModel parse_model(const ordered_json& j, const std::string& path) {
    OutcomeModel model;
    try {
        model.link = link_from_string(
            require_string(require_field(j, "link", path), path + ".link"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ".link: " + e.what());
    }
    model.beta0 = require_number(require_field(j, "beta0", path), path + ".beta0");
    model.beta1 = require_number(require_field(j, "beta1", path), path + ".beta1");
    for (const char* field : {"beta2", "gamma"}) {
        if (!j.contains(field)) continue;
        const auto& sub = j.at(field);
        if (!sub.is_object())
            throw ConfigError(path + "." + field + ": expected an object");
        for (const auto& [arm, value] : sub.items()) {
            Treatment t;
            try {
                t = treatment_from_string(arm);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(path + "." + field + ": " + e.what());
            }
            const double v =
                require_number(value, path + "." + field + "." + arm);
            if (std::string(field) == "beta2")
                model.beta2[t] = v;
            else
                model.gamma[t] = v;
        }
    }
    if (j.contains("shape"))
        model.shape = require_number(j.at("shape"), path + ".shape");
    if (j.contains("sigma"))
        model.sigma = require_number(j.at("sigma"), path + ".sigma");
    try {
        model.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return model;
}

ordered_json model_to_json(const OutcomeModel& model) {
    ordered_json j;
    j["link"] = to_string(model.link);
    j["beta0"] = model.beta0;
    j["beta1"] = model.beta1;
    ordered_json beta2, gamma;
    for (const auto& [t, v] : model.beta2) beta2[to_string(t)] = v;
    for (const auto& [t, v] : model.gamma) gamma[to_string(t)] = v;
    j["beta2"] = beta2;
    j["gamma"] = gamma;
    if (model.shape) j["shape"] = *model.shape;
    if (model.sigma) j["sigma"] = *model.sigma;
    return j;
}

PopulationSpec parse_population(const ordered_json& j, const std::string& path) {
    std::string label;
    if (j.contains("label")) label = require_string(j.at("label"), path + ".label");
    try {
        if (j.contains("uniform")) {
            const auto& u = j.at("uniform");
            const double mean =
                require_number(require_field(u, "mean", path + ".uniform"),
                               path + ".uniform.mean");
            const double range = u.contains("range")
                                     ? require_number(u.at("range"),
                                                      path + ".uniform.range")
                                     : 2.0;
            return PopulationSpec::uniform(mean, range, label);
        }
        if (j.contains("discrete")) {
            const auto& points = j.at("discrete");
            if (!points.is_array())
                throw ConfigError(path + ".discrete: expected an array");
            std::vector<std::pair<double, double>> parsed;
            for (const auto& point : points) {
                if (!point.is_array() || point.size() != 2)
                    throw ConfigError(path + ".discrete: expected [x, prob] pairs");
                parsed.emplace_back(point[0].get<double>(), point[1].get<double>());
            }
            return PopulationSpec::discrete(std::move(parsed), label);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ": " + e.what());
    }
    throw ConfigError(path + ": population needs 'uniform' or 'discrete'");
}

ordered_json population_to_json(const PopulationSpec& pop) {
    ordered_json j;
    j["label"] = pop.label;
    if (pop.is_uniform()) {
        j["uniform"] = {{"mean", pop.as_uniform().mean},
                        {"range", pop.as_uniform().range}};
    } else {
        ordered_json points = ordered_json::array();
        for (const auto& [x, p] : pop.as_discrete().points)
            points.push_back({x, p});
        j["discrete"] = points;
    }
    return j;
}

EffectMeasure parse_measure(const ordered_json& j, const std::string& path) {
    try {
        const MeasureKind kind = measure_kind_from_string(
            require_string(require_field(j, "kind", path), path + ".kind"));
        const std::string estimand = require_string(
            require_field(j, "estimand", path), path + ".estimand");
        if (estimand != "conditional" && estimand != "marginal")
            throw ConfigError(path + ".estimand: expected conditional|marginal");
        std::optional<double> tau;
        if (j.contains("tau"))
            tau = require_number(j.at("tau"), path + ".tau");
        return EffectMeasure(kind,
                             estimand == "conditional" ? EstimandKind::conditional
                                                       : EstimandKind::marginal,
                             tau);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("top level: expected an object");

    ScenarioConfig config;
    config.name = require_string(require_field(j, "name", "scenario"), "name");
    if (config.name.empty()) throw ConfigError("name: must be non-empty");

    if (j.contains("models")) {
        const auto& models = j.at("models");
        if (!models.is_array())
            throw ConfigError("models: expected an array");
        for (std::size_t i = 0; i < models.size(); ++i) {
            const std::string path = "models[" + std::to_string(i) + "]";
            ModelVariant variant;
            variant.label = require_string(
                require_field(models[i], "label", path), path + ".label");
            variant.model =
                parse_model(require_field(models[i], "model", path), path + ".model");
            config.models.push_back(std::move(variant));
        }
    } else if (j.contains("model")) {
        config.models.push_back({"model", parse_model(j.at("model"), "model")});
    }

    if (j.contains("grid")) {
        const auto& grid = j.at("grid");
        if (grid.contains("default") && grid.at("default").get<bool>()) {
            config.grid = default_grid();
        } else {
            const auto& pops = require_field(grid, "populations", "grid");
            if (!pops.is_array() || pops.empty())
                throw ConfigError("grid.populations: expected a non-empty array");
            for (std::size_t i = 0; i < pops.size(); ++i)
                config.grid.populations.push_back(parse_population(
                    pops[i], "grid.populations[" + std::to_string(i) + "]"));
            config.grid.comparator_index =
                grid.contains("comparator_index")
                    ? grid.at("comparator_index").get<std::size_t>()
                    : 0;
            if (config.grid.comparator_index >= config.grid.populations.size())
                throw ConfigError("grid.comparator_index: out of range");
        }
    } else {
        config.grid = default_grid();
    }

    config.index_population =
        j.contains("index_population")
            ? parse_population(j.at("index_population"), "index_population")
            : default_index_population();

    if (j.contains("measures")) {
        const auto& measures = j.at("measures");
        if (!measures.is_array())
            throw ConfigError("measures: expected an array");
        for (std::size_t i = 0; i < measures.size(); ++i)
            config.measures.push_back(parse_measure(
                measures[i], "measures[" + std::to_string(i) + "]"));
    }
    if (!config.measures.empty() && config.models.empty())
        throw ConfigError("model: required when measures are present");

    if (j.contains("n_per_population")) {
        const double n = require_number(j.at("n_per_population"), "n_per_population");
        if (n < 1) throw ConfigError("n_per_population: must be >= 1");
        config.n_per_population = static_cast<std::size_t>(n);
    }
    if (j.contains("base_seed"))
        config.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("mode")) {
        const std::string mode = require_string(j.at("mode"), "mode");
        if (mode == "truth_quadrature")
            config.mode = PipelineMode::truth_quadrature;
        else if (mode == "truth_monte_carlo")
            config.mode = PipelineMode::truth_monte_carlo;
        else if (mode == "estimated_model")
            config.mode = PipelineMode::estimated_model;
        else
            throw ConfigError(
                "mode: expected truth_quadrature|truth_monte_carlo|estimated_model");
    }
    if (j.contains("mechanism")) {
        const std::string mech = require_string(j.at("mechanism"), "mechanism");
        if (mech == "maic")
            config.mechanism = Mechanism::weighting;
        else if (mech == "stc")
            config.mechanism = Mechanism::gcomp;
        else
            throw ConfigError("mechanism: expected maic|stc");
    }
    if (j.contains("extra_checks")) {
        const auto& checks = j.at("extra_checks");
        if (!checks.is_array()) throw ConfigError("extra_checks: expected an array");
        for (const auto& check : checks) {
            const std::string name = check.get<std::string>();
            static const std::vector<std::string> known = {
                "b2", "b3", "tableA1", "tableA2", "classification"};
            if (std::find(known.begin(), known.end(), name) == known.end())
                throw ConfigError("extra_checks: unknown check '" + name + "'");
            config.extra_checks.push_back(name);
        }
    }
    if (j.contains("outputs"))
        config.outputs = require_string(j.at("outputs"), "outputs");
    return config;
}

std::string scenario_to_json(const ScenarioConfig& config) {
    ordered_json j;
    j["name"] = config.name;
    ordered_json models = ordered_json::array();
    for (const auto& variant : config.models)
        models.push_back(
            {{"label", variant.label}, {"model", model_to_json(variant.model)}});
    j["models"] = models;
    ordered_json grid;
    ordered_json pops = ordered_json::array();
    for (const auto& pop : config.grid.populations)
        pops.push_back(population_to_json(pop));
    grid["populations"] = pops;
    grid["comparator_index"] = config.grid.comparator_index;
    j["grid"] = grid;
    j["index_population"] = population_to_json(config.index_population);
    ordered_json measures = ordered_json::array();
    for (const auto& measure : config.measures) {
        ordered_json m;
        m["kind"] = to_string(measure.kind);
        m["estimand"] = to_string(measure.estimand);
        if (measure.tau) m["tau"] = *measure.tau;
        measures.push_back(m);
    }
    j["measures"] = measures;
    j["n_per_population"] = config.n_per_population;
    j["base_seed"] = config.base_seed;
    j["mode"] = to_string(config.mode);
    j["mechanism"] =
        config.mechanism == Mechanism::weighting ? "maic" : "stc";
    j["extra_checks"] = config.extra_checks;
    j["outputs"] = config.outputs;
    return j.dump(2);
}

std::vector<std::string> validate_scenario(const ScenarioConfig& config) {
    std::vector<std::string> warnings;
    if (!config.grid.populations.empty() &&
        std::abs(config.grid.comparator().mean()) > 1e-12)
        warnings.push_back(
            "grid.comparator: mean " + fmt_short(config.grid.comparator().mean()) +
            " differs from 0; bundled study figures place the comparator at 0");
    for (const auto& measure : config.measures)
        for (const auto& variant : config.models)
            require_compatible(measure.kind, variant.model.link);  // throws
    return warnings;
}

// ---------------------------------------------------------------------------
// Bundled scenarios
// ---------------------------------------------------------------------------

namespace {

ScenarioConfig make_base(const std::string& name) {
    ScenarioConfig config;
    config.name = name;
    config.grid = default_grid();
    config.index_population = default_index_population();
    config.outputs = "out/" + name;
    return config;
}

ScenarioConfig make_fig5() {
    ScenarioConfig config = make_base("fig5");
    config.models = {{"sema", study_mean_difference(true)},
                     {"no_sema", study_mean_difference(false)}};
    config.measures = {
        EffectMeasure(MeasureKind::mean_difference, EstimandKind::conditional),
        EffectMeasure(MeasureKind::mean_difference, EstimandKind::marginal)};
    return config;
}

ScenarioConfig make_fig6() {
    ScenarioConfig config = make_base("fig6");
    config.models = {{"sema", study_log_odds(true)},
                     {"no_sema", study_log_odds(false)}};
    config.measures = {
        EffectMeasure(MeasureKind::log_odds_ratio, EstimandKind::conditional),
        EffectMeasure(MeasureKind::log_odds_ratio, EstimandKind::marginal)};
    return config;
}

ScenarioConfig make_fig7() {
    ScenarioConfig config = make_base("fig7");
    config.models = {{"sema", study_weibull(true)},
                     {"no_sema", study_weibull(false)}};
    config.measures = {
        EffectMeasure(MeasureKind::conditional_log_hazard_ratio,
                      EstimandKind::conditional),
        EffectMeasure(MeasureKind::rmst_difference, EstimandKind::conditional,
                      kDefaultTau),
        EffectMeasure(MeasureKind::rmst_difference, EstimandKind::marginal,
                      kDefaultTau),
        EffectMeasure(MeasureKind::log_rmst_ratio, EstimandKind::conditional,
                      kDefaultTau),
        EffectMeasure(MeasureKind::log_rmst_ratio, EstimandKind::marginal,
                      kDefaultTau)};
    return config;
}

ScenarioConfig make_figc4() {
    ScenarioConfig config = make_base("figC4");
    config.models = {{"sema", study_log_risk(true)},
                     {"no_sema", study_log_risk(false)}};
    config.measures = {
        EffectMeasure(MeasureKind::log_risk_ratio, EstimandKind::conditional),
        EffectMeasure(MeasureKind::log_risk_ratio, EstimandKind::marginal)};
    config.extra_checks = {"b3"};
    return config;
}

ScenarioConfig make_checks_only(const std::string& name,
                                std::vector<std::string> checks) {
    ScenarioConfig config = make_base(name);
    config.extra_checks = std::move(checks);
    return config;
}

}  // namespace

const std::vector<BundledScenario>& bundled_scenarios() {
    static const std::vector<BundledScenario> list = {
        {"fig5", "mean differences: conditional/marginal bias curves, SEMA and no-SEMA"},
        {"fig6", "log odds ratios: conditional vs marginal bias curves"},
        {"fig7", "Weibull survival: log hazard ratio and RMST-based bias curves"},
        {"figC1", "effects plot for the mean-difference study"},
        {"figC2", "effects plot for the log-odds-ratio study"},
        {"figC3", "effects plot for the RMST study"},
        {"figC4", "log risk ratios under a log link, with induced-collapsibility check"},
        {"figC5", "bias of directly transported log risk ratios"},
        {"tableA1", "conditional-contrast constancy checks, four measure/link rows"},
        {"tableA2", "marginal-curve constancy checks, four measure/link rows"},
        {"table1_classification", "rule-based verdicts vs empirical flatness, 10 combos"},
        {"appendixB2", "two-point counterexample: log RR is not directly collapsible"},
    };
    return list;
}

ScenarioConfig bundled_scenario(const std::string& name) {
    ScenarioConfig config;
    if (name == "fig5") config = make_fig5();
    else if (name == "fig6") config = make_fig6();
    else if (name == "fig7") config = make_fig7();
    else if (name == "figC1") { config = make_fig5(); config.name = "figC1"; }
    else if (name == "figC2") { config = make_fig6(); config.name = "figC2"; }
    else if (name == "figC3") { config = make_fig7(); config.name = "figC3"; }
    else if (name == "figC4") config = make_figc4();
    else if (name == "figC5") { config = make_figc4(); config.name = "figC5"; }
    else if (name == "tableA1") config = make_checks_only("tableA1", {"tableA1"});
    else if (name == "tableA2") config = make_checks_only("tableA2", {"tableA2"});
    else if (name == "table1_classification")
        config = make_checks_only("table1_classification", {"classification"});
    else if (name == "appendixB2") config = make_checks_only("appendixB2", {"b2"});
    else throw ConfigError("unknown bundled scenario: " + name);
    config.outputs = "out/" + config.name;
    return config;
}

ScenarioConfig load_scenario(const std::string& path_or_name) {
    for (const auto& bundled : bundled_scenarios())
        if (bundled.name == path_or_name) return bundled_scenario(path_or_name);
    std::ifstream in(path_or_name);
    if (!in)
        throw ConfigError("cannot read scenario file or bundled name: " +
                          path_or_name);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

namespace {

int worker_count(std::size_t jobs) {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("TRANSPORTLAB_THREADS")) {
        const int requested = std::atoi(env);
        if (requested >= 1) cap = std::min(cap, requested);
    }
    return static_cast<int>(std::min<std::size_t>(cap, jobs));
}

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const int workers = worker_count(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < count; i = next++) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& thread : threads) thread.join();
    for (const auto& error : errors)
        if (error) std::rethrow_exception(error);
}

struct JobResult {
    std::string variant;
    EffectMeasure measure;
    std::vector<EstimandValue> effects;
    std::vector<BiasPoint> bias;
    CheckReport check;
};

std::vector<double> probe_points(const PopulationGrid& grid, int count = 50) {
    // Span the union of the grid supports.
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& pop : grid.populations) {
        const double l = pop.is_uniform() ? pop.as_uniform().lower() : pop.mean();
        const double u = pop.is_uniform() ? pop.as_uniform().upper() : pop.mean();
        if (first || l < lo) lo = l;
        if (first || u > hi) hi = u;
        first = false;
    }
    std::vector<double> points;
    for (int i = 0; i < count; ++i)
        points.push_back(lo + (hi - lo) * i / (count - 1.0));
    return points;
}

std::vector<CheckReport> table_a1_checks(const PopulationGrid& grid) {
    const auto probes = probe_points(grid);
    std::vector<CheckReport> reports;
    reports.push_back(check_a1(
        study_mean_difference(true),
        EffectMeasure(MeasureKind::mean_difference, EstimandKind::conditional),
        probes));
    reports.push_back(check_a1(
        study_log_odds(true),
        EffectMeasure(MeasureKind::log_odds_ratio, EstimandKind::conditional),
        probes));
    reports.push_back(check_a1(
        study_log_odds(true),
        EffectMeasure(MeasureKind::risk_difference, EstimandKind::conditional),
        probes));
    reports.push_back(check_a1(
        study_weibull(true),
        EffectMeasure(MeasureKind::rmst_difference, EstimandKind::conditional,
                      kDefaultTau),
        probes));
    return reports;
}

std::vector<CheckReport> table_a2_checks(const PopulationGrid& grid) {
    std::vector<CheckReport> reports;
    reports.push_back(check_a2(
        study_mean_difference(true),
        EffectMeasure(MeasureKind::mean_difference, EstimandKind::marginal),
        grid));
    reports.push_back(check_a2(
        study_log_odds(true),
        EffectMeasure(MeasureKind::log_odds_ratio, EstimandKind::marginal),
        grid));
    reports.push_back(check_a2(
        study_log_odds(true),
        EffectMeasure(MeasureKind::risk_difference, EstimandKind::marginal),
        grid));
    reports.push_back(check_a2(
        study_weibull(true),
        EffectMeasure(MeasureKind::rmst_difference, EstimandKind::marginal,
                      kDefaultTau),
        grid));
    return reports;
}

struct ClassificationCase {
    EffectMeasure measure;
    OutcomeModel model;
    std::string scenario;
};

std::vector<ClassificationCase> classification_cases() {
    using MK = MeasureKind;
    using EK = EstimandKind;
    return {
        {{MK::mean_difference, EK::marginal}, study_mean_difference(true), "mean/sema"},
        {{MK::mean_difference, EK::marginal}, study_mean_difference(false), "mean/no_sema"},
        {{MK::log_odds_ratio, EK::conditional}, study_log_odds(true), "logit/sema"},
        {{MK::log_odds_ratio, EK::conditional}, study_log_odds(false), "logit/no_sema"},
        {{MK::log_odds_ratio, EK::marginal}, study_log_odds(true), "logit/sema"},
        {{MK::log_risk_ratio, EK::marginal}, study_log_risk(true), "log/sema"},
        {{MK::log_risk_ratio, EK::marginal}, study_log_risk(false), "log/no_sema"},
        {{MK::conditional_log_hazard_ratio, EK::conditional}, study_weibull(true),
         "weibull/sema"},
        {{MK::rmst_difference, EK::marginal, kDefaultTau}, study_weibull(true),
         "weibull/sema"},
        {{MK::log_rmst_ratio, EK::conditional, kDefaultTau}, study_weibull(true),
         "weibull/sema"},
    };
}

std::vector<CheckReport> classification_checks(const PopulationGrid& grid) {
    std::vector<CheckReport> reports;
    for (const auto& test_case : classification_cases()) {
        const TransportVerdict verdict =
            classify_measure(test_case.measure, test_case.model.link,
                             test_case.model.sema_holds());
        const auto curve = effect_curve(test_case.model, test_case.measure, grid,
                                        Treatment::B, Treatment::C);
        double lo = curve.front().value, hi = lo;
        for (const auto& point : curve) {
            lo = std::min(lo, point.value);
            hi = std::max(hi, point.value);
        }
        const double spread = hi - lo;
        const bool flat = spread < 1e-6;

        CheckReport report;
        report.name = "classify/" + test_case.measure.name() + "/" +
                      to_string(test_case.measure.estimand) + "/" +
                      test_case.scenario;
        report.constancy_expected = verdict.directly_transportable;
        report.spread = spread;
        report.values["spread"] = spread;
        report.ok = flat == verdict.directly_transportable;
        report.detail = report.ok
                            ? "verdict matches empirical flatness (" +
                                  verdict.reason + ")"
                            : "verdict disagrees with empirical flatness";
        reports.push_back(std::move(report));
    }
    return reports;
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e"};

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (mu_x, bias)
};

std::string svg_chart(const std::string& header, const std::string& title,
                      const std::vector<Series>& series, double comparator_x) {
    constexpr double width = 800, height = 500;
    constexpr double ml = 70, mr = 20, mt = 45, mb = 50;
    double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
    bool first = true;
    for (const auto& line : series)
        for (const auto& [x, y] : line.points) {
            if (first || x < xlo) xlo = x;
            if (first || x > xhi) xhi = x;
            if (first || y < ylo) ylo = y;
            if (first || y > yhi) yhi = y;
            first = false;
        }
    if (xhi == xlo) { xlo -= 0.5; xhi += 0.5; }
    if (yhi - ylo < 1e-9) { ylo -= 0.5; yhi += 0.5; }
    const double ypad = 0.06 * (yhi - ylo);
    ylo -= ypad;
    yhi += ypad;
    auto sx = [&](double x) { return ml + (x - xlo) / (xhi - xlo) * (width - ml - mr); };
    auto sy = [&](double y) { return height - mb - (y - ylo) / (yhi - ylo) * (height - mt - mb); };

    std::ostringstream os;
    os << "<!-- " << header << " -->\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\">\n";
    os << "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
    os << "<text x=\"400\" y=\"25\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"16\">" << title << "</text>\n";
    // axes
    os << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\""
       << width - mr << "\" y2=\"" << height - mb
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
       << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    // zero line if in range
    if (ylo < 0.0 && yhi > 0.0)
        os << "<line x1=\"" << ml << "\" y1=\"" << sy(0.0) << "\" x2=\""
           << width - mr << "\" y2=\"" << sy(0.0)
           << "\" stroke=\"#bbbbbb\" stroke-width=\"0.7\"/>\n";
    // comparator reference
    if (comparator_x >= xlo && comparator_x <= xhi)
        os << "<line x1=\"" << sx(comparator_x) << "\" y1=\"" << mt << "\" x2=\""
           << sx(comparator_x) << "\" y2=\"" << height - mb
           << "\" stroke=\"#555555\" stroke-dasharray=\"5,4\"/>\n";
    // axis labels
    os << "<text x=\"" << ml - 8 << "\" y=\"" << sy(ylo) + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << fmt_short(ylo) << "</text>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << sy(yhi) + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << fmt_short(yhi) << "</text>\n";
    os << "<text x=\"" << sx(xlo) << "\" y=\"" << height - mb + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
       << fmt_short(xlo) << "</text>\n";
    os << "<text x=\"" << sx(xhi) << "\" y=\"" << height - mb + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
       << fmt_short(xhi) << "</text>\n";
    os << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
          "target population mean of X</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = kSeriesColors[k % 4];
        os << "<polyline fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.8\" points=\"";
        for (const auto& [x, y] : series[k].points)
            os << sx(x) << "," << sy(y) << " ";
        os << "\"/>\n";
        os << "<text x=\"" << width - mr - 8 << "\" y=\"" << mt + 16 + 16 * k
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
              "fill=\"" << color << "\">" << series[k].label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config) {
    if (config.models.empty() && config.extra_checks.empty() &&
        config.measures.empty())
        throw ConfigError("scenario declares neither measures nor checks");
    for (const auto& variant : config.models) variant.model.validate();

    // All (variant, measure) jobs; deterministic order and seeds.
    struct Job {
        std::size_t variant_index;
        std::size_t measure_index;
    };
    std::vector<Job> jobs;
    for (std::size_t v = 0; v < config.models.size(); ++v)
        for (std::size_t m = 0; m < config.measures.size(); ++m)
            jobs.push_back({v, m});

    std::vector<JobResult> results(jobs.size());
    const auto probes = probe_points(config.grid);
    parallel_for(jobs.size(), [&](std::size_t i) {
        const auto& variant = config.models[jobs[i].variant_index];
        const EffectMeasure& measure = config.measures[jobs[i].measure_index];
        JobResult& out = results[i];
        out.variant = variant.label;
        out.measure = measure;
        out.effects = effect_curve(variant.model, measure, config.grid,
                                   Treatment::B, Treatment::C);
        PipelineOptions opts;
        opts.mechanism = config.mechanism;
        opts.mode = config.mode;
        opts.n = config.n_per_population;
        opts.seed = mix_seed(config.base_seed, i + 1);
        out.bias = two_step_pipeline(variant.model, measure,
                                     config.index_population, config.grid, opts);
        out.check = measure.estimand == EstimandKind::conditional
                        ? check_a1(variant.model, measure, probes)
                        : check_a2(variant.model, measure, config.grid);
        out.check.name += "[" + variant.label + "]";
    });

    ScenarioResult result;
    for (const auto& job : results) result.reports.push_back(job.check);
    for (const auto& check : config.extra_checks) {
        if (check == "b2") {
            result.reports.push_back(check_b2_counterexample());
        } else if (check == "b3") {
            result.reports.push_back(check_b3(study_log_risk(true), config.grid));
        } else if (check == "tableA1") {
            for (auto& report : table_a1_checks(config.grid))
                result.reports.push_back(std::move(report));
        } else if (check == "tableA2") {
            for (auto& report : table_a2_checks(config.grid))
                result.reports.push_back(std::move(report));
        } else if (check == "classification") {
            for (auto& report : classification_checks(config.grid))
                result.reports.push_back(std::move(report));
        }
    }
    result.all_ok = std::all_of(
        result.reports.begin(), result.reports.end(),
        [](const CheckReport& report) { return report.status() != "FAIL"; });

    // All computation done; write artifacts.
    namespace fs = std::filesystem;
    fs::create_directories(config.outputs);
    const std::string header = "scenario=" + config.name +
                               " seed=" + std::to_string(config.base_seed) +
                               " mode=" + to_string(config.mode) +
                               " version=" + kArtifactVersion;

    {
        const std::string path = config.outputs + "/effects.csv";
        std::ofstream out(path);
        out << "# " << header << "\n";
        out << "population_label,mu_x,variant,measure,estimand,value,se\n";
        for (const auto& job : results) {
            for (std::size_t p = 0; p < job.effects.size(); ++p) {
                const auto& effect = job.effects[p];
                out << effect.population << ','
                    << fmt_double(config.grid.populations[p].mean()) << ','
                    << job.variant << ',' << to_string(job.measure.kind) << ','
                    << to_string(job.measure.estimand) << ','
                    << fmt_double(effect.value) << ',';
                if (effect.monte_carlo) out << fmt_double(effect.monte_carlo->se);
                out << '\n';
            }
        }
        result.artifacts.push_back(path);
    }
    {
        const std::string path = config.outputs + "/bias.csv";
        std::ofstream out(path);
        out << "# " << header << "\n";
        out << "target_label,mu_x,variant,measure,estimand,mechanism,"
               "transported,truth,bias,ess\n";
        for (const auto& job : results) {
            for (const auto& point : job.bias) {
                out << point.target_label << ',' << fmt_double(point.mu_x) << ','
                    << job.variant << ',' << to_string(job.measure.kind) << ','
                    << to_string(job.measure.estimand) << ','
                    << to_string(point.transported.mechanism) << ','
                    << fmt_double(point.transported.value) << ','
                    << fmt_double(point.truth.value) << ','
                    << fmt_double(point.bias) << ',';
                auto ess = point.transported.diagnostics.find("ess");
                if (ess != point.transported.diagnostics.end())
                    out << fmt_double(ess->second);
                out << '\n';
            }
        }
        result.artifacts.push_back(path);
    }
    if (config.mode == PipelineMode::estimated_model) {
        // The patient-level data each job's model fit consumed.
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            const auto& variant = config.models[jobs[i].variant_index];
            const auto& measure = config.measures[jobs[i].measure_index];
            const SimulatedTrial trial =
                simulate_index_trial(variant.model, config.index_population,
                                     config.n_per_population,
                                     mix_seed(config.base_seed, i + 1));
            const bool survival = variant.model.link == Link::log_hazard_weibull;
            const std::string path = config.outputs + "/trial_" + variant.label +
                                     "_" + to_string(measure.kind) + "_" +
                                     to_string(measure.estimand) + ".csv";
            std::ofstream out(path);
            out << "# " << header << "\n";
            out << (survival ? "x,treatment,time,event\n" : "x,treatment,y\n");
            for (std::size_t r = 0; r < trial.x.size(); ++r) {
                out << fmt_double(trial.x[r]) << ','
                    << to_string(trial.arm[r]) << ','
                    << fmt_double(trial.y[r]);
                if (survival) out << ",1";
                out << '\n';
            }
            result.artifacts.push_back(path);
        }
    }
    {
        const std::string path = config.outputs + "/propositions.json";
        std::ofstream out(path);
        ordered_json doc;
        doc["header"] = header;
        doc["checks"] = nlohmann::ordered_json::parse(reports_to_json(result.reports));
        out << doc.dump(2) << '\n';
        result.artifacts.push_back(path);
    }
    // One bias chart per (measure, estimand), one polyline per variant.
    for (std::size_t m = 0; m < config.measures.size(); ++m) {
        const EffectMeasure& measure = config.measures[m];
        std::vector<Series> series;
        for (const auto& job : results) {
            if (job.measure.kind != measure.kind ||
                job.measure.estimand != measure.estimand)
                continue;
            Series line;
            line.label = job.variant;
            for (const auto& point : job.bias)
                line.points.emplace_back(point.mu_x, point.bias);
            series.push_back(std::move(line));
        }
        if (series.empty()) continue;
        const std::string path = config.outputs + "/bias_" +
                                 to_string(measure.kind) + "_" +
                                 to_string(measure.estimand) + ".svg";
        std::ofstream out(path);
        out << svg_chart(header,
                         "Transport bias: " + to_string(measure.kind) + " (" +
                             to_string(measure.estimand) + ")",
                         series, config.grid.comparator().mean());
        result.artifacts.push_back(path);
    }
    return result;
}

}  // namespace transportlab
