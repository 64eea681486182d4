#pragma once

#include <vector>

#include "itms/controllers.hpp"
#include "itms/plant.hpp"
#include "itms/scenario.hpp"

namespace itms {

struct TraceRecord {
    double t = 0.0;
    PlantState state;
    ControlInput u;  ///< input held over [t, t + dt)
    bool door_signal = false;
    bool lower_active = false;
    double q_hp = 0.0;  ///< heat-pump output held over [t, t + dt), W
};

using Trace = std::vector<TraceRecord>;

struct SimulationOptions {
    double dt = 1.0;  ///< plant integration step, s
    HeatPumpLaw heat_pump;
};

/// Closed-loop rollout of `scenario` under `controller`, sampled every
/// controller.control_period() seconds with a zero-order hold in between.
/// One record per plant step, t = 0, dt, ..., duration.
/// Errors from the plant are rethrown with the simulation time attached.
[[nodiscard]] Trace simulate(const Scenario& scenario, const PlantParams& params,
                             Controller& controller, const SimulationOptions& options);

/// Forecast of q_add over `steps` control intervals starting at `t`,
/// evaluated at the current state.
[[nodiscard]] std::vector<SectionArray> forecast_q_add(const Scenario& scenario,
                                                       const PlantState& x, double t,
                                                       double period, std::size_t steps);

}  // namespace itms
