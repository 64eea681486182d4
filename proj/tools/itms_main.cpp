#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "itms/config.hpp"
#include "itms/errors.hpp"
#include "itms/metrics.hpp"
#include "itms/runner.hpp"
#include "itms/trace_io.hpp"

namespace {

std::vector<std::string> split_names(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    for (const auto& item : raw) {
        std::stringstream ss(item);
        for (std::string name; std::getline(ss, name, ',');) {
            if (!name.empty()) out.push_back(name);
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EV cabin and battery heating simulator with MPC and rule-based controllers"};
    app.require_subcommand(1);

    itms::RunManifest manifest;
    std::vector<std::string> controllers;
    auto* run = app.add_subcommand("run", "Simulate a scenario under one or more controllers");
    run->add_option("--scenario", manifest.scenario_path, "Scenario YAML file")->required();
    run->add_option("--controllers", controllers,
                    "Comma-separated list: hierarchical,single_mpc,rule_based")
        ->delimiter(',');
    run->add_option("--out", manifest.out_dir, "Output directory")->required();
    run->add_flag("--charts", manifest.charts, "Also write SVG charts");
    run->add_option("--set", manifest.overrides, "Config override key.path=value")
        ->take_all();

    std::string trace_path, metrics_scenario;
    std::vector<std::string> metrics_overrides;
    auto* metrics = app.add_subcommand("metrics", "Recompute the metrics report of a trace CSV");
    metrics->add_option("--trace", trace_path, "Trace CSV")->required();
    metrics->add_option("--scenario", metrics_scenario, "Scenario YAML file")->required();
    metrics->add_option("--set", metrics_overrides, "Config override key.path=value")->take_all();

    std::string validate_path;
    std::vector<std::string> validate_overrides;
    auto* validate = app.add_subcommand("validate-config", "Parse and check a config file");
    validate->add_option("path", validate_path, "Config YAML file")->required();
    validate->add_option("--set", validate_overrides, "Config override key.path=value")
        ->take_all();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*run) {
            if (!controllers.empty()) manifest.controllers = split_names(controllers);
            std::filesystem::create_directories(manifest.out_dir);
            std::ofstream log(std::filesystem::path(manifest.out_dir) / "run.log",
                              std::ios::app);
            const auto result = itms::run(manifest, log ? &log : nullptr);
            for (const auto& f : result.files) std::cout << f << '\n';
            const auto table = std::filesystem::path(manifest.out_dir) / "comparison.txt";
            std::ifstream in(table);
            std::cout << '\n' << in.rdbuf();
        } else if (*metrics) {
            const auto cfg = itms::load_config(metrics_scenario, metrics_overrides);
            const auto trace = itms::read_trace_csv(trace_path);
            std::cout << itms::report_json(itms::compute_report(trace, cfg.scenario, cfg.plant));
        } else if (*validate) {
            (void)itms::load_config(validate_path, validate_overrides);
            std::cout << validate_path << ": ok\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return itms::exit_code_for(e);
    }
    return 0;
}
