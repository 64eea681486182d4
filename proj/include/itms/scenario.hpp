#pragma once

// Exogenous signals of a drive: ambient and solar profiles, traction power,
// door openings with delayed cold-air spread, and passenger boardings.

#include <optional>
#include <vector>

#include "itms/plant.hpp"

namespace itms {

struct DoorEvent {
    double t_open = 0.0;    ///< s
    double duration = 0.0;  ///< s, door is open on [t_open, t_open + duration)
    int section = 4;        ///< 1..4
};

struct PassengerEvent {
    double t_board = 0.0;
    int section = 4;
    double q_occ_person = 0.0;  ///< W
};

struct Breakpoint {
    double t = 0.0;
    double value = 0.0;
};

struct Scenario {
    double duration = 1800.0;
    double t_set_cab = 23.0;
    double t_set_bat = 15.0;
    std::vector<Breakpoint> t_amb_profile{{0.0, -7.0}};  ///< piecewise constant
    std::vector<Breakpoint> q_sol_profile{{0.0, 0.0}};   ///< piecewise constant
    std::vector<Breakpoint> drive_cycle{{0.0, 0.0}};     ///< linear interpolation
    std::vector<DoorEvent> door_events;
    std::vector<PassengerEvent> passenger_events;
    double propagation_delay = 3.0;  ///< s before cold air reaches other sections
    double door_loss_coeff = 20.0;   ///< W/K through the open door
    /// Spread weights {diagonal, same side other row, same row neighbour}.
    /// For a rear-right door (section 4) these are sections {1, 2, 3}.
    std::array<double, 3> spread_fractions{0.2, 0.2, 0.5};
    double passenger_window = 60.0;  ///< s a boarding stays detectable
    double initial_temperature = -7.0;
    /// Battery start temperature; defaults to initial_temperature when unset.
    std::optional<double> initial_battery_temperature;
    double initial_soc = 0.8;

    void validate() const;

    [[nodiscard]] PlantState initial_state() const {
        PlantState x = PlantState::uniform(initial_temperature, initial_soc);
        if (initial_battery_temperature) x.t_bat = *initial_battery_temperature;
        return x;
    }
};

[[nodiscard]] bool door_signal(const Scenario& s, double t);

/// Spread weight of the door in `door_section` onto `section` (both 1-based).
[[nodiscard]] double spread_weight(const Scenario& s, int door_section, int section);

/// Door losses and passenger heat per section.
[[nodiscard]] SectionArray q_add(const Scenario& s, const PlantState& x, double t);

[[nodiscard]] double ambient(const Scenario& s, double t);
[[nodiscard]] double traction_power(const Scenario& s, double t);
[[nodiscard]] double q_sol(const Scenario& s, double t);

/// Total heat of everyone who has boarded by `t`.
[[nodiscard]] double occupant_heat(const Scenario& s, double t);

/// Section of the most recent boarding within the detection window.
[[nodiscard]] std::optional<int> passenger_signal(const Scenario& s, double t);

/// End of the door opening active at `t`, if any.
[[nodiscard]] std::optional<double> door_close_time(const Scenario& s, double t);

/// First door opening time of the scenario.
[[nodiscard]] std::optional<double> first_door_open(const Scenario& s);

[[nodiscard]] DisturbanceInput disturbance(const Scenario& s, const PlantState& x, double t);

}  // namespace itms
