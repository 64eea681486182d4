#include "itms/runner.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "itms/charts.hpp"
#include "itms/errors.hpp"
#include "itms/trace_io.hpp"

namespace itms {
namespace {

void log_line(std::ostream* log, const std::string& msg) {
    if (!log) return;
    const auto now = std::chrono::system_clock::now();
    *log << fmt::format("{:%Y-%m-%dT%H:%M:%S} {}\n",
                        std::chrono::time_point_cast<std::chrono::seconds>(now), msg);
    log->flush();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(fmt::format("cannot write '{}'", path.string()));
    os << text;
    if (!os) throw Error(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace

std::vector<std::string> normalize_controllers(std::vector<std::string> names) {
    if (names.empty()) throw ArgumentError("at least one controller is required");
    for (const auto& n : names) {
        if (std::find(kControllerNames.begin(), kControllerNames.end(), n) ==
            kControllerNames.end()) {
            throw ArgumentError(fmt::format(
                "unknown controller '{}' (expected hierarchical, single_mpc or rule_based)", n));
        }
    }
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    return names;
}

ControllerRun run_controller(const RunConfig& cfg, const std::string& name) {
    auto controller = make_controller(name, cfg.controllers, cfg.model, cfg.simulation.heat_pump);
    const auto tag = [&](const std::exception& e) { return fmt::format("{}: {}", name, e.what()); };
    try {
        ControllerRun out;
        out.name = name;
        out.trace = simulate(cfg.scenario, cfg.plant, *controller, cfg.simulation);
        out.report = compute_report(out.trace, cfg.scenario, cfg.plant);
        return out;
    } catch (const DivergenceError& e) {
        throw DivergenceError(e.step_index(), tag(e));
    } catch (const DepletionError& e) {
        throw DepletionError(e.time_in_step(), tag(e));
    } catch (const NumericalBlowupError& e) {
        throw NumericalBlowupError(e.step_index(), tag(e));
    } catch (const InfeasibleError& e) {
        throw InfeasibleError(tag(e));
    } catch (const DomainError& e) {
        throw DomainError(e.field(), tag(e));
    }
}

RunResult run(const RunManifest& manifest, std::ostream* log) {
    const auto names = normalize_controllers(manifest.controllers);
    const RunConfig cfg = load_config(manifest.scenario_path, manifest.overrides);
    if (manifest.out_dir.empty()) throw ArgumentError("output directory is required");
    const std::filesystem::path out(manifest.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec || !std::filesystem::is_directory(out)) {
        throw ArgumentError(fmt::format("cannot create output directory '{}'", out.string()));
    }
    log_line(log, fmt::format("config {} loaded, {} override(s)", manifest.scenario_path,
                              manifest.overrides.size()));

    RunResult result;
    for (const auto& name : names) {
        log_line(log, fmt::format("simulating {}", name));
        result.runs.push_back(run_controller(cfg, name));
        log_line(log, fmt::format("finished {}", name));
    }

    std::vector<std::pair<std::string, MetricsReport>> reports;
    for (const auto& r : result.runs) {
        const auto trace_path = out / fmt::format("trace_{}.csv", r.name);
        write_trace_csv(trace_path.string(), r.trace);
        const auto report_path = out / fmt::format("metrics_{}.json", r.name);
        write_text(report_path, report_json(r.report));
        result.files.push_back(trace_path.string());
        result.files.push_back(report_path.string());
        reports.emplace_back(r.name, r.report);
    }
    const auto table_path = out / "comparison.txt";
    write_text(table_path, comparison_table(reports));
    result.files.push_back(table_path.string());

    if (manifest.charts) {
        std::vector<NamedTrace> named;
        for (const auto& r : result.runs) named.emplace_back(r.name, r.trace);
        for (auto& p : render_charts(named, cfg.plant, cfg.scenario.t_set_cab, out.string())) {
            result.files.push_back(std::move(p));
        }
    }
    log_line(log, fmt::format("wrote {} file(s) to {}", result.files.size(), out.string()));
    return result;
}

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ArgumentError*>(&e)) return 2;
    if (dynamic_cast<const DivergenceError*>(&e) || dynamic_cast<const DepletionError*>(&e) ||
        dynamic_cast<const NumericalBlowupError*>(&e) || dynamic_cast<const DomainError*>(&e)) {
        return 3;
    }
    if (dynamic_cast<const InfeasibleError*>(&e)) return 4;
    return 1;
}

}  // namespace itms
