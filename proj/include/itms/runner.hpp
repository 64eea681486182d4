#pragma once

// Batch comparison run: simulate a scenario under several controllers and
// write traces, metrics reports, a comparison table and optional charts.

#include <exception>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "itms/config.hpp"
#include "itms/metrics.hpp"

namespace itms {

struct RunManifest {
    std::string scenario_path;
    std::vector<std::string> controllers{"hierarchical", "single_mpc", "rule_based"};
    std::string out_dir;
    std::vector<std::string> overrides;  ///< key.path=value
    bool charts = false;
};

struct ControllerRun {
    std::string name;
    Trace trace;
    MetricsReport report;
};

struct RunResult {
    std::vector<ControllerRun> runs;  ///< sorted by controller name
    std::vector<std::string> files;   ///< data files written, in write order
};

/// Sorted, de-duplicated controller names; throws ArgumentError on an empty
/// list or an unknown name.
[[nodiscard]] std::vector<std::string> normalize_controllers(std::vector<std::string> names);

/// Simulate one controller. Errors carry the controller name.
[[nodiscard]] ControllerRun run_controller(const RunConfig& cfg, const std::string& name);

/// Full run. Progress lines with wall-clock stamps go to `log` when given;
/// data files never contain timestamps.
RunResult run(const RunManifest& manifest, std::ostream* log = nullptr);

/// Process exit status for an error escaping run(): 2 configuration or
/// usage, 3 divergence, 4 infeasibility, 1 anything else.
[[nodiscard]] int exit_code_for(const std::exception& e) noexcept;

}  // namespace itms
