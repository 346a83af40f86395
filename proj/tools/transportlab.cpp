#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "transportlab/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumeric = 1;
constexpr int kExitConfig = 2;

int cmd_list() {
    for (const auto& scenario : transportlab::bundled_scenarios())
        std::printf("%-24s %s\n", scenario.name.c_str(),
                    scenario.description.c_str());
    return kExitOk;
}

int cmd_validate(const std::string& target) {
    try {
        const auto config = transportlab::load_scenario(target);
        for (const auto& warning : transportlab::validate_scenario(config))
            std::cout << "warning: " << warning << "\n";
        std::cout << "ok: " << config.name << "\n";
        return kExitOk;
    } catch (const transportlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_run(const std::string& target, bool quiet) {
    transportlab::ScenarioConfig config;
    try {
        config = transportlab::load_scenario(target);
        transportlab::validate_scenario(config);
    } catch (const transportlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        const auto result = transportlab::run_scenario(config);
        if (!quiet) {
            std::cout << transportlab::reports_to_text(result.reports);
            for (const auto& artifact : result.artifacts)
                std::cout << "wrote " << artifact << "\n";
        }
        if (!result.all_ok) {
            std::cerr << "scenario " << config.name
                      << ": one or more checks failed\n";
            return kExitNumeric;
        }
        return kExitOk;
    } catch (const transportlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"transportlab: estimand transportability laboratory"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand(
        "run", "run a scenario (bundled name or JSON file) and write artifacts");
    std::string run_target;
    bool quiet = false;
    run->add_option("scenario", run_target, "bundled scenario name or JSON path")
        ->required();
    run->add_flag("-q,--quiet", quiet, "suppress per-check output");

    auto* list = app.add_subcommand("list", "list bundled scenarios");

    auto* validate = app.add_subcommand(
        "validate", "parse and lint a scenario without running it");
    std::string validate_target;
    validate
        ->add_option("scenario", validate_target,
                     "bundled scenario name or JSON path")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (list->parsed()) return cmd_list();
    if (validate->parsed()) return cmd_validate(validate_target);
    return cmd_run(run_target, quiet);
}
