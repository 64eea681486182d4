#pragma once

// Lumped-parameter thermal model of the EV integrated thermal management
// system: a four-node coolant loop driven by a heat pump, a battery on one
// coolant branch, the air-side heat exchanger on the other, the heated air
// volume, a lumped cabin with its body shell, and four cabin sections fed by
// individually metered air inflows.
//
// All temperatures are in degC; only differences enter the balances.

#include <array>
#include <cstddef>

namespace itms {

inline constexpr std::size_t kSections = 4;
using SectionArray = std::array<double, kSections>;

/// Lower edge of the simulation sanity band, degC.
inline constexpr double kTempFloor = -60.0;
/// Upper edge of the simulation sanity band, degC.
inline constexpr double kTempCeil = 150.0;

struct PlantState {
    double t_c1 = 0.0;  ///< coolant after the heat-pump exchanger
    double t_c2 = 0.0;  ///< coolant after the cabin-side exchanger
    double t_c3 = 0.0;  ///< coolant after the battery
    double t_c4 = 0.0;  ///< merged return coolant
    double t_ha = 0.0;  ///< heated supply air
    double t_cab = 0.0; ///< lumped cabin air
    double t_cb = 0.0;  ///< cabin body shell
    SectionArray t_s{}; ///< per-section cabin air
    double t_bat = 0.0;
    double soc = 1.0;

    static constexpr std::size_t kSize = 13;
    using Array = std::array<double, kSize>;

    [[nodiscard]] Array to_array() const;
    [[nodiscard]] static PlantState from_array(const Array& a);

    /// Every temperature equal to `temp`.
    [[nodiscard]] static PlantState uniform(double temp, double soc = 1.0);

    /// Throws DomainError / DivergenceError on sanity-band violations.
    void check(std::size_t step_index = 0) const;

    friend bool operator==(const PlantState&, const PlantState&) = default;
};

/// Field names in declaration order, matching PlantState::to_array().
inline constexpr std::array<const char*, PlantState::kSize> kStateFieldNames{
    "t_c1", "t_c2", "t_c3", "t_c4", "t_ha", "t_cab", "t_cb",
    "t_s1", "t_s2", "t_s3", "t_s4", "t_bat", "soc"};

struct PlantParams {
    double alpha_cab = 6.0;   ///< W/(m^2 K)
    double alpha_cb = 6.0;    ///< W/(m^2 K)
    double a_cb = 10.0;       ///< m^2
    SectionArray a_cb_sec{2.5, 2.5, 2.5, 2.5};
    double m_a = 3.5;         ///< kg
    SectionArray m_s{0.875, 0.875, 0.875, 0.875};
    double m_cb = 150.0;      ///< kg
    double c_a = 1005.0;      ///< J/(kg K)
    double c_cb = 500.0;      ///< J/(kg K)
    double gamma_hx = 300.0;  ///< W/K
    double gamma_bat = 400.0; ///< W/K
    std::array<double, 4> m_c_node{1.5, 1.5, 1.5, 1.5};
    double c_cool = 3500.0;   ///< J/(kg K)
    double q_hp_max = 5000.0; ///< W
    double cop = 2.5;
    double m_bat = 450.0;     ///< kg
    double c_bat = 1000.0;    ///< J/(kg K)
    double e_batt = 2.304e8;  ///< J (64 kWh)

    double r_eff = 0.05;              ///< ohm, lumped pack resistance
    double v_nom = 350.0;             ///< V
    double pump_power_coeff = 200.0;  ///< W per kg/s of coolant flow
    double pump_capacity = 0.5;       ///< kg/s, limit on mdot_b + mdot_c

    /// Throws ConfigError when a field is non-positive or the section
    /// partitions do not sum to the lumped totals.
    void validate() const;
};

struct ControlInput {
    double mdot_b = 0.0;   ///< kg/s coolant through the battery branch
    double mdot_c = 0.0;   ///< kg/s coolant through the cabin branch
    SectionArray mdot_a{}; ///< kg/s air into each section

    [[nodiscard]] double total_air() const;
    [[nodiscard]] double total_coolant() const { return mdot_b + mdot_c; }

    friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

struct DisturbanceInput {
    double t_amb = -7.0;
    double q_occ = 0.0;   ///< W into the lumped cabin
    double q_sol = 0.0;   ///< W into the cabin body
    SectionArray q_add{}; ///< W per section, door losses negative
    double p_trac = 0.0;  ///< W drawn by the traction drive
};

struct CabinRates {
    double d_cab = 0.0;
    double d_cb = 0.0;
};

struct BatteryRates {
    double d_bat = 0.0;
    double d_soc = 0.0;
};

[[nodiscard]] CabinRates lumped_cabin_deriv(const PlantState& x, const PlantParams& p,
                                            const ControlInput& u, const DisturbanceInput& d);

[[nodiscard]] double heated_air_deriv(const PlantState& x, const PlantParams& p,
                                      const ControlInput& u);

[[nodiscard]] SectionArray sections_deriv(const PlantState& x, const PlantParams& p,
                                          const ControlInput& u, const DisturbanceInput& d);

/// Four-node loop: node 1 takes the heat-pump output from the merged return,
/// node 2 (cabin branch) exchanges with the heated air, node 3 (battery branch)
/// exchanges with the battery, node 4 relaxes to the flow-weighted mixture.
[[nodiscard]] std::array<double, 4> coolant_deriv(const PlantState& x, const PlantParams& p,
                                                  const ControlInput& u, double q_hp);

[[nodiscard]] BatteryRates battery_soc_deriv(const PlantState& x, const PlantParams& p,
                                             const ControlInput& u, const DisturbanceInput& d,
                                             double q_hp);

/// Joule loss r_eff * (p_trac / v_nom)^2 dissipated in the pack.
[[nodiscard]] double battery_heat_loss(const PlantParams& p, double p_trac);

/// Coolant pump electric power.
[[nodiscard]] double aux_power(const PlantParams& p, const ControlInput& u);

/// Electric power drawn for thermal management (heat pump plus pumps).
[[nodiscard]] double thermal_electric_power(const PlantParams& p, const ControlInput& u,
                                            double q_hp);

/// Time derivative of every state, packed in a PlantState.
[[nodiscard]] PlantState full_deriv(const PlantState& x, const PlantParams& p,
                                    const ControlInput& u, const DisturbanceInput& d,
                                    double q_hp);

/// Classical RK4 advance with u, d and q_hp held over the step.
/// Requires 0 < dt <= 1. Throws DepletionError if SOC would drop below zero and
/// DivergenceError (carrying `step_index`) if the result leaves the sanity band.
[[nodiscard]] PlantState step(const PlantState& x, const PlantParams& p, const ControlInput& u,
                              const DisturbanceInput& d, double q_hp, double dt,
                              std::size_t step_index = 0);

/// Generic classical Runge-Kutta step over a fixed-size array.
template <std::size_t N, class Deriv>
[[nodiscard]] std::array<double, N> rk4_step(const std::array<double, N>& x, double dt,
                                             Deriv&& f) {
    const std::array<double, N> k1 = f(x);
    std::array<double, N> tmp{};
    for (std::size_t i = 0; i < N; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
    const std::array<double, N> k2 = f(tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
    const std::array<double, N> k3 = f(tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = x[i] + dt * k3[i];
    const std::array<double, N> k4 = f(tmp);
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return out;
}

/// Thermostatic heat-pump command: full output while either the lumped cabin
/// or the battery is below its setpoint, then throttled linearly to zero as
/// the smaller excess over setpoint grows to `band`.
struct HeatPumpLaw {
    double t_set_cab = 23.0;
    double t_set_bat = 15.0;
    double band = 1.0;  ///< degC

    [[nodiscard]] double command(const PlantState& x, const PlantParams& p) const;
};

}  // namespace itms
