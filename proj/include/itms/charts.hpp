#pragma once

// Static SVG charts comparing controller traces on a shared time grid.

#include <string>
#include <utility>
#include <vector>

#include "itms/plant.hpp"
#include "itms/simulation.hpp"

namespace itms {

using NamedTrace = std::pair<std::string, Trace>;

/// Four panels, one per section, one polyline per trace.
[[nodiscard]] std::string section_chart_svg(const std::vector<NamedTrace>& traces);
/// Max inter-section gap against time, one polyline per trace.
[[nodiscard]] std::string gap_chart_svg(const std::vector<NamedTrace>& traces);
/// Mass-weighted section mean against time with the setpoint dashed.
[[nodiscard]] std::string average_chart_svg(const std::vector<NamedTrace>& traces,
                                            const PlantParams& p, double t_set);

/// Writes sections.svg, gap.svg and average.svg into `dir`; returns the paths.
/// Throws ArgumentError for an empty list or traces on different time grids.
std::vector<std::string> render_charts(const std::vector<NamedTrace>& traces, const PlantParams& p,
                                       double t_set, const std::string& dir);

}  // namespace itms
