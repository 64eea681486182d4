#pragma once

// Comparison quantities computed from simulation traces: section drops,
// inter-section gaps, average-temperature overshoot, recovery time and the
// electrical energy spent on heating.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "itms/plant.hpp"
#include "itms/scenario.hpp"
#include "itms/simulation.hpp"

namespace itms {

/// Closed time interval [begin, end], s.
struct Window {
    double begin = 0.0;
    double end = 0.0;
};

/// Records of `trace` with begin <= t <= end.
[[nodiscard]] Trace slice(const Trace& trace, const Window& w);

/// T_s,section at the window start minus its minimum over the window.
/// `section` is 1-based. Throws ArgumentError on an empty window.
[[nodiscard]] double section_drop(const Trace& trace, int section, const Window& w);

struct GapSeries {
    std::vector<double> t;
    std::vector<double> gap;  ///< max_i T_si - min_i T_si per record
    double max = 0.0;
};

[[nodiscard]] double section_gap(const PlantState& x);
[[nodiscard]] GapSeries max_section_gap(const Trace& trace);

/// Max over t >= from_t of (mass-weighted section mean - t_set), clamped at 0.
[[nodiscard]] double overshoot(const Trace& trace, const PlantParams& p, double t_set,
                               double from_t);

/// Seconds after from_t until every section stays within delta of t_set for
/// `dwell` seconds; nullopt if that never happens inside the trace.
[[nodiscard]] std::optional<double> recovery_time(const Trace& trace, double t_set, double delta,
                                                  double from_t, double dwell = 30.0);

/// 100 * (baseline - proposed) / baseline. Throws ArgumentError if baseline <= 0.
[[nodiscard]] double reduction_pct(double baseline, double proposed);

/// Trapezoidal integral of q_hp / cop + pump power, J.
[[nodiscard]] double energy_consumed(const Trace& trace, const PlantParams& p);

struct MetricsOptions {
    double drop_window = 300.0;  ///< s after door opening
    double recovery_tol = 0.5;   ///< degC
    double dwell = 30.0;         ///< s
};

struct MetricsReport {
    double t_ref = 0.0;  ///< first door opening, or 0 without doors
    Window window;       ///< recovery window the scalar metrics refer to
    std::array<double, kSections> drop{};
    GapSeries gap;       ///< series over the full trace
    double max_gap = 0.0;  ///< max gap inside the window
    double overshoot = 0.0;
    std::optional<double> recovery_time;
    double energy = 0.0;
};

[[nodiscard]] MetricsReport compute_report(const Trace& trace, const Scenario& scenario,
                                           const PlantParams& p,
                                           const MetricsOptions& options = {});

/// JSON object text; identical reports give identical text.
[[nodiscard]] std::string report_json(const MetricsReport& r);

/// Fixed-column table of the headline metrics with pairwise reductions
/// of each controller against every other one.
[[nodiscard]] std::string comparison_table(
    const std::vector<std::pair<std::string, MetricsReport>>& reports);

}  // namespace itms
