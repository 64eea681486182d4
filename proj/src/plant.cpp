#include "itms/plant.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "itms/errors.hpp"

namespace itms {
namespace {

void require_finite(double v, const char* field) {
    if (!std::isfinite(v)) {
        throw DomainError(field, fmt::format("non-finite value in field '{}'", field));
    }
}

void require_finite_state(const PlantState& x) {
    const auto a = x.to_array();
    for (std::size_t i = 0; i < a.size(); ++i) require_finite(a[i], kStateFieldNames[i]);
}

void require_finite_input(const ControlInput& u) {
    require_finite(u.mdot_b, "mdot_b");
    require_finite(u.mdot_c, "mdot_c");
    static constexpr std::array<const char*, kSections> names{"mdot_a1", "mdot_a2", "mdot_a3",
                                                              "mdot_a4"};
    for (std::size_t i = 0; i < kSections; ++i) require_finite(u.mdot_a[i], names[i]);
}

void require_finite_disturbance(const DisturbanceInput& d) {
    require_finite(d.t_amb, "t_amb");
    require_finite(d.q_occ, "q_occ");
    require_finite(d.q_sol, "q_sol");
    require_finite(d.p_trac, "p_trac");
    static constexpr std::array<const char*, kSections> names{"q_add1", "q_add2", "q_add3",
                                                              "q_add4"};
    for (std::size_t i = 0; i < kSections; ++i) require_finite(d.q_add[i], names[i]);
}

bool close_rel(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

PlantState::Array PlantState::to_array() const {
    return {t_c1, t_c2, t_c3, t_c4, t_ha, t_cab, t_cb, t_s[0], t_s[1], t_s[2], t_s[3], t_bat, soc};
}

PlantState PlantState::from_array(const Array& a) {
    PlantState x;
    x.t_c1 = a[0];
    x.t_c2 = a[1];
    x.t_c3 = a[2];
    x.t_c4 = a[3];
    x.t_ha = a[4];
    x.t_cab = a[5];
    x.t_cb = a[6];
    x.t_s = {a[7], a[8], a[9], a[10]};
    x.t_bat = a[11];
    x.soc = a[12];
    return x;
}

PlantState PlantState::uniform(double temp, double soc) {
    PlantState x;
    x.t_c1 = x.t_c2 = x.t_c3 = x.t_c4 = temp;
    x.t_ha = x.t_cab = x.t_cb = x.t_bat = temp;
    x.t_s.fill(temp);
    x.soc = soc;
    return x;
}

void PlantState::check(std::size_t step_index) const {
    const auto a = to_array();
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        if (!std::isfinite(a[i]) || a[i] < kTempFloor || a[i] > kTempCeil) {
            throw DivergenceError(step_index,
                                  fmt::format("state field '{}' = {} left [{}, {}] degC at step {}",
                                              kStateFieldNames[i], a[i], kTempFloor, kTempCeil,
                                              step_index));
        }
    }
    if (!std::isfinite(soc) || soc < 0.0 || soc > 1.0) {
        throw DivergenceError(step_index,
                              fmt::format("soc = {} outside [0, 1] at step {}", soc, step_index));
    }
}

void PlantParams::validate() const {
    const std::array<std::pair<const char*, double>, 22> scalars{{
        {"alpha_cab", alpha_cab}, {"alpha_cb", alpha_cb}, {"a_cb", a_cb}, {"m_a", m_a},
        {"m_cb", m_cb}, {"c_a", c_a}, {"c_cb", c_cb}, {"gamma_hx", gamma_hx},
        {"gamma_bat", gamma_bat}, {"c_cool", c_cool}, {"q_hp_max", q_hp_max}, {"cop", cop},
        {"m_bat", m_bat}, {"c_bat", c_bat}, {"e_batt", e_batt}, {"r_eff", r_eff},
        {"v_nom", v_nom}, {"pump_power_coeff", pump_power_coeff},
        {"pump_capacity", pump_capacity}, {"m_c_node[0]", m_c_node[0]},
        {"m_c_node[1]", m_c_node[1]}, {"m_c_node[2]", m_c_node[2]},
    }};
    for (const auto& [name, v] : scalars) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError(fmt::format("plant parameter '{}' must be positive, got {}", name, v));
        }
    }
    if (!(m_c_node[3] > 0.0)) throw ConfigError("plant parameter 'm_c_node[3]' must be positive");
    for (std::size_t i = 0; i < kSections; ++i) {
        if (!(a_cb_sec[i] > 0.0) || !(m_s[i] > 0.0)) {
            throw ConfigError(fmt::format("section {} area and air mass must be positive", i + 1));
        }
    }
    const double a_sum = std::accumulate(a_cb_sec.begin(), a_cb_sec.end(), 0.0);
    const double m_sum = std::accumulate(m_s.begin(), m_s.end(), 0.0);
    if (!close_rel(a_sum, a_cb)) {
        throw ConfigError(fmt::format("sum(a_cb_sec) = {} does not match a_cb = {}", a_sum, a_cb));
    }
    if (!close_rel(m_sum, m_a)) {
        throw ConfigError(fmt::format("sum(m_s) = {} does not match m_a = {}", m_sum, m_a));
    }
}

double ControlInput::total_air() const {
    return mdot_a[0] + mdot_a[1] + mdot_a[2] + mdot_a[3];
}

CabinRates lumped_cabin_deriv(const PlantState& x, const PlantParams& p, const ControlInput& u,
                              const DisturbanceInput& d) {
    require_finite_state(x);
    require_finite_input(u);
    require_finite_disturbance(d);
    const double mdot_a = u.total_air();
    CabinRates r;
    r.d_cab = (p.alpha_cab * p.a_cb * (x.t_cb - x.t_cab) + mdot_a * p.c_a * (x.t_ha - x.t_cab) +
               d.q_occ) /
              (p.m_a * p.c_a);
    r.d_cb = (p.alpha_cb * p.a_cb * (x.t_cab - x.t_cb) + p.alpha_cb * p.a_cb * (d.t_amb - x.t_cb) +
              d.q_sol) /
             (p.m_cb * p.c_cb);
    return r;
}

double heated_air_deriv(const PlantState& x, const PlantParams& p, const ControlInput& u) {
    require_finite_state(x);
    require_finite_input(u);
    const double mdot_a = u.total_air();
    return (mdot_a * p.c_a * (x.t_cab - x.t_ha) + p.gamma_hx * (x.t_c2 - x.t_ha)) /
           (p.m_a * p.c_a);
}

SectionArray sections_deriv(const PlantState& x, const PlantParams& p, const ControlInput& u,
                            const DisturbanceInput& d) {
    require_finite_state(x);
    require_finite_input(u);
    require_finite_disturbance(d);
    SectionArray out{};
    for (std::size_t i = 0; i < kSections; ++i) {
        out[i] = (p.alpha_cb * p.a_cb_sec[i] * (x.t_cb - x.t_s[i]) +
                  u.mdot_a[i] * p.c_a * (x.t_ha - x.t_s[i]) + d.q_add[i]) /
                 (p.m_s[i] * p.c_a);
    }
    return out;
}

std::array<double, 4> coolant_deriv(const PlantState& x, const PlantParams& p,
                                    const ControlInput& u, double q_hp) {
    require_finite_state(x);
    require_finite_input(u);
    require_finite(q_hp, "q_hp");
    const double flow = u.total_coolant();
    if (!(flow > 0.0)) {
        throw DegenerateFlowError(
            fmt::format("total coolant flow must be positive, got mdot_b + mdot_c = {}", flow));
    }
    const double c = p.c_cool;
    std::array<double, 4> out{};
    out[0] = (flow * c * (x.t_c4 - x.t_c1) + q_hp) / (p.m_c_node[0] * c);
    out[1] = (u.mdot_c * c * (x.t_c1 - x.t_c2) + p.gamma_hx * (x.t_ha - x.t_c2)) /
             (p.m_c_node[1] * c);
    out[2] = (u.mdot_b * c * (x.t_c1 - x.t_c3) + p.gamma_bat * (x.t_bat - x.t_c3)) /
             (p.m_c_node[2] * c);
    out[3] = (u.mdot_c * c * x.t_c2 + u.mdot_b * c * x.t_c3 - flow * c * x.t_c4) /
             (p.m_c_node[3] * c);
    return out;
}

double battery_heat_loss(const PlantParams& p, double p_trac) {
    const double current = p_trac / p.v_nom;
    return p.r_eff * current * current;
}

double aux_power(const PlantParams& p, const ControlInput& u) {
    return p.pump_power_coeff * u.total_coolant();
}

double thermal_electric_power(const PlantParams& p, const ControlInput& u, double q_hp) {
    return q_hp / p.cop + aux_power(p, u);
}

BatteryRates battery_soc_deriv(const PlantState& x, const PlantParams& p, const ControlInput& u,
                               const DisturbanceInput& d, double q_hp) {
    require_finite_state(x);
    require_finite_input(u);
    require_finite_disturbance(d);
    require_finite(q_hp, "q_hp");
    if (x.soc < 0.0 || x.soc > 1.0) {
        throw DomainError("soc", fmt::format("soc = {} outside [0, 1]", x.soc));
    }
    BatteryRates r;
    r.d_bat = (p.gamma_bat * (x.t_c3 - x.t_bat) + battery_heat_loss(p, d.p_trac)) /
              (p.m_bat * p.c_bat);
    r.d_soc = -(d.p_trac + thermal_electric_power(p, u, q_hp)) / p.e_batt;
    return r;
}

PlantState full_deriv(const PlantState& x, const PlantParams& p, const ControlInput& u,
                      const DisturbanceInput& d, double q_hp) {
    const CabinRates cabin = lumped_cabin_deriv(x, p, u, d);
    const double d_ha = heated_air_deriv(x, p, u);
    const SectionArray d_s = sections_deriv(x, p, u, d);
    const auto d_c = coolant_deriv(x, p, u, q_hp);
    const BatteryRates bat = battery_soc_deriv(x, p, u, d, q_hp);

    PlantState dx;
    dx.t_c1 = d_c[0];
    dx.t_c2 = d_c[1];
    dx.t_c3 = d_c[2];
    dx.t_c4 = d_c[3];
    dx.t_ha = d_ha;
    dx.t_cab = cabin.d_cab;
    dx.t_cb = cabin.d_cb;
    dx.t_s = d_s;
    dx.t_bat = bat.d_bat;
    dx.soc = bat.d_soc;
    return dx;
}

PlantState step(const PlantState& x, const PlantParams& p, const ControlInput& u,
                const DisturbanceInput& d, double q_hp, double dt, std::size_t step_index) {
    if (!(dt > 0.0) || dt > 1.0) {
        throw ArgumentError(fmt::format("integration step must satisfy 0 < dt <= 1 s, got {}", dt));
    }
    auto depleted = [&](double rate) {
        // Linear estimate of when the charge ran out inside this step.
        const double t_dep = rate > 0.0 ? std::min(x.soc / rate, dt) : 0.0;
        return DepletionError(t_dep, fmt::format("battery depleted {:.3f} s into step {}", t_dep,
                                                 step_index));
    };
    PlantState::Array next;
    try {
        next = rk4_step(x.to_array(), dt, [&](const PlantState::Array& a) {
            return full_deriv(PlantState::from_array(a), p, u, d, q_hp).to_array();
        });
    } catch (const DomainError& e) {
        // An intermediate stage already ran the pack below zero charge.
        if (e.field() != "soc" || !(x.soc >= 0.0 && x.soc <= 1.0)) throw;
        throw depleted(-battery_soc_deriv(x, p, u, d, q_hp).d_soc);
    }
    PlantState out = PlantState::from_array(next);
    if (out.soc < 0.0) throw depleted((x.soc - out.soc) / dt);
    out.check(step_index);
    return out;
}

double HeatPumpLaw::command(const PlantState& x, const PlantParams& p) const {
    const double deficit = std::max(t_set_cab - x.t_cab, t_set_bat - x.t_bat);
    if (deficit >= 0.0) return p.q_hp_max;
    return p.q_hp_max * std::clamp(1.0 + deficit / band, 0.0, 1.0);
}

}  // namespace itms
