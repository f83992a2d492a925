// nevlab command-line runner.
//
//   nevlab run <config.json>     execute the selected checks, write CSVs,
//                                summary.json and the resolved config;
//                                exit code 0 iff all hard assertions pass
//   nevlab list-checks           enumerate every registered check
//   nevlab describe <check>      print the statement a check verifies
//   nevlab version

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nevlab/harness.hpp"
#include "nevlab/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"nevlab: heat-kernel, Green-exhaustion and value-distribution checks at desk scale"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "execute checks from a JSON config");
    run_cmd->add_option("config", config_path, "path to the config file")->required();

    auto* list_cmd = app.add_subcommand("list-checks", "list registered checks");

    std::string check_name;
    auto* describe_cmd = app.add_subcommand("describe", "describe one check");
    describe_cmd->add_option("check", check_name, "check name")->required();

    auto* version_cmd = app.add_subcommand("version", "print the version");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const auto cfg = nevlab::harness::load_config_file(config_path);
            const auto outcome = nevlab::harness::run(cfg);
            for (const auto& entry : outcome.summary.at("checks"))
                std::cout << (entry.at("passed").get<bool>() ? "[PASS] " : "[FAIL] ")
                          << entry.at("name").get<std::string>() << ": "
                          << entry.at("detail").get<std::string>() << "\n";
            std::cout << (outcome.all_passed ? "all checks passed" : "some checks FAILED") << "\n";
            return outcome.all_passed ? 0 : 1;
        }
        if (list_cmd->parsed()) {
            for (const auto& info : nevlab::harness::check_registry()) std::cout << info.name << "\n";
            return 0;
        }
        if (describe_cmd->parsed()) {
            const auto& info = nevlab::harness::find_check(check_name);
            std::cout << info.name << ": " << info.description << "\n";
            return 0;
        }
        if (version_cmd->parsed()) {
            std::cout << "nevlab " << nevlab::kVersion << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
