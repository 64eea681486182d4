#include "itms/simulation.hpp"

#include <cmath>

#include <fmt/format.h>

#include "itms/errors.hpp"

namespace itms {

std::vector<SectionArray> forecast_q_add(const Scenario& scenario, const PlantState& x, double t,
                                         double period, std::size_t steps) {
    std::vector<SectionArray> out;
    out.reserve(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        out.push_back(q_add(scenario, x, t + static_cast<double>(k) * period));
    }
    return out;
}

Trace simulate(const Scenario& scenario, const PlantParams& params, Controller& controller,
               const SimulationOptions& options) {
    scenario.validate();
    params.validate();
    const double dt = options.dt;
    if (!(dt > 0.0) || dt > 1.0) throw ArgumentError("simulation dt must lie in (0, 1]");
    const double period = controller.control_period();
    const auto n_steps = static_cast<std::size_t>(std::llround(scenario.duration / dt));
    const auto ctrl_every = static_cast<std::size_t>(std::llround(period / dt));
    if (ctrl_every < 1 || std::abs(static_cast<double>(ctrl_every) * dt - period) > 1e-9) {
        throw ConfigError(
            fmt::format("control period {} s is not a multiple of the plant step {} s", period, dt));
    }

    Trace trace;
    trace.reserve(n_steps + 1);
    PlantState x = scenario.initial_state();
    ControlInput u = controller.initial_input();
    bool lower_active = false;

    for (std::size_t i = 0; i <= n_steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        const DisturbanceInput d = disturbance(scenario, x, t);
        if (i % ctrl_every == 0) {
            Observation obs;
            obs.t = t;
            obs.state = x;
            obs.disturbance = d;
            obs.door_open = door_signal(scenario, t);
            obs.passenger_section = passenger_signal(scenario, t);
            if (controller.forecast_steps() > 0) {
                obs.q_add_forecast =
                    forecast_q_add(scenario, x, t, period, controller.forecast_steps());
            }
            try {
                const ControllerOutput out = controller.step(obs);
                u = out.u;
                lower_active = out.lower_layer_active;
            } catch (const InfeasibleError& e) {
                throw InfeasibleError(fmt::format("t = {} s: {}", t, e.what()));
            }
        }
        const double q_hp = options.heat_pump.command(x, params);
        trace.push_back({t, x, u, door_signal(scenario, t), lower_active, q_hp});
        if (i == n_steps) break;
        try {
            x = step(x, params, u, d, q_hp, dt, i + 1);
        } catch (const DivergenceError& e) {
            throw DivergenceError(e.step_index(), fmt::format("t = {} s: {}", t + dt, e.what()));
        } catch (const DepletionError& e) {
            throw DepletionError(e.time_in_step(),
                                 fmt::format("t = {} s: {}", t + e.time_in_step(), e.what()));
        }
    }
    return trace;
}

}  // namespace itms
