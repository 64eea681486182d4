#include "itms/scenario.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "itms/errors.hpp"

namespace itms {
namespace {

void validate_table(const std::vector<Breakpoint>& table, const char* name) {
    if (table.empty()) throw ConfigError(fmt::format("'{}' table is empty", name));
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (!std::isfinite(table[i].t) || !std::isfinite(table[i].value)) {
            throw ConfigError(fmt::format("'{}' entry {} is not finite", name, i));
        }
        if (i > 0 && !(table[i].t > table[i - 1].t)) {
            throw ConfigError(fmt::format("'{}' breakpoints must be strictly increasing", name));
        }
    }
}

double piecewise_constant(const std::vector<Breakpoint>& table, double t, const char* name) {
    if (table.empty()) throw ConfigError(fmt::format("'{}' table is empty", name));
    // Last breakpoint with bp.t <= t; before the first one, hold the first value.
    auto it = std::upper_bound(table.begin(), table.end(), t,
                               [](double v, const Breakpoint& bp) { return v < bp.t; });
    if (it == table.begin()) return table.front().value;
    return std::prev(it)->value;
}

double linear(const std::vector<Breakpoint>& table, double t, const char* name) {
    if (table.empty()) throw ConfigError(fmt::format("'{}' table is empty", name));
    if (t <= table.front().t) return table.front().value;
    if (t >= table.back().t) return table.back().value;
    auto hi = std::upper_bound(table.begin(), table.end(), t,
                               [](double v, const Breakpoint& bp) { return v < bp.t; });
    auto lo = std::prev(hi);
    const double w = (t - lo->t) / (hi->t - lo->t);
    return lo->value + w * (hi->value - lo->value);
}

bool door_open(const DoorEvent& e, double t) {
    return t >= e.t_open && t < e.t_open + e.duration;
}

}  // namespace

void Scenario::validate() const {
    if (!(duration > 0.0)) throw ConfigError("scenario duration must be positive");
    validate_table(t_amb_profile, "ambient");
    validate_table(q_sol_profile, "solar");
    validate_table(drive_cycle, "drive_cycle");
    for (const auto& bp : q_sol_profile) {
        if (bp.value < 0.0) throw ConfigError("solar heat must be non-negative");
    }
    for (const auto& e : door_events) {
        if (!(e.duration > 0.0)) throw ConfigError("door event duration must be positive");
        if (e.section < 1 || e.section > 4) {
            throw ConfigError(fmt::format("door event section {} not in 1..4", e.section));
        }
    }
    for (const auto& e : passenger_events) {
        if (e.section < 1 || e.section > 4) {
            throw ConfigError(fmt::format("passenger event section {} not in 1..4", e.section));
        }
        if (e.q_occ_person < 0.0) throw ConfigError("passenger heat must be non-negative");
    }
    for (double f : spread_fractions) {
        if (f < 0.0 || f > 1.0) throw ConfigError("spread fractions must lie in [0, 1]");
    }
    if (spread_fractions[2] < spread_fractions[0] || spread_fractions[2] < spread_fractions[1]) {
        throw ConfigError("same-row spread fraction must dominate the other two");
    }
    if (propagation_delay < 0.0) throw ConfigError("propagation delay must be non-negative");
    if (door_loss_coeff < 0.0) throw ConfigError("door loss coefficient must be non-negative");
    if (!(passenger_window > 0.0)) throw ConfigError("passenger window must be positive");
    if (initial_soc <= 0.0 || initial_soc > 1.0) throw ConfigError("initial soc must lie in (0, 1]");
    if (initial_temperature < kTempFloor || initial_temperature > kTempCeil) {
        throw ConfigError("initial temperature outside the sanity band");
    }
}

bool door_signal(const Scenario& s, double t) {
    return std::any_of(s.door_events.begin(), s.door_events.end(),
                       [t](const DoorEvent& e) { return door_open(e, t); });
}

double spread_weight(const Scenario& s, int door_section, int section) {
    if (door_section == section) return 1.0;
    // 2x2 layout: sections 1,2 in the front row, 3,4 in the rear; 1,3 on the left.
    const int dr = (door_section - 1) / 2, dc = (door_section - 1) % 2;
    const int r = (section - 1) / 2, c = (section - 1) % 2;
    if (r == dr) return s.spread_fractions[2];
    if (c == dc) return s.spread_fractions[1];
    return s.spread_fractions[0];
}

SectionArray q_add(const Scenario& s, const PlantState& x, double t) {
    SectionArray out{};
    const double t_amb = ambient(s, t);
    for (const auto& e : s.door_events) {
        if (!door_open(e, t)) continue;
        const bool spread = t >= e.t_open + s.propagation_delay;
        for (int i = 1; i <= 4; ++i) {
            if (i != e.section && !spread) continue;
            const auto k = static_cast<std::size_t>(i - 1);
            out[k] -= spread_weight(s, e.section, i) * s.door_loss_coeff * (x.t_s[k] - t_amb);
        }
    }
    for (const auto& pe : s.passenger_events) {
        if (t >= pe.t_board) out[static_cast<std::size_t>(pe.section - 1)] += pe.q_occ_person;
    }
    return out;
}

double ambient(const Scenario& s, double t) {
    return piecewise_constant(s.t_amb_profile, t, "ambient");
}

double traction_power(const Scenario& s, double t) { return linear(s.drive_cycle, t, "drive_cycle"); }

double q_sol(const Scenario& s, double t) { return piecewise_constant(s.q_sol_profile, t, "solar"); }

double occupant_heat(const Scenario& s, double t) {
    double q = 0.0;
    for (const auto& pe : s.passenger_events) {
        if (t >= pe.t_board) q += pe.q_occ_person;
    }
    return q;
}

std::optional<int> passenger_signal(const Scenario& s, double t) {
    const PassengerEvent* latest = nullptr;
    for (const auto& pe : s.passenger_events) {
        if (t >= pe.t_board && t < pe.t_board + s.passenger_window) {
            if (latest == nullptr || pe.t_board >= latest->t_board) latest = &pe;
        }
    }
    if (latest == nullptr) return std::nullopt;
    return latest->section;
}

std::optional<double> door_close_time(const Scenario& s, double t) {
    std::optional<double> close;
    for (const auto& e : s.door_events) {
        if (door_open(e, t)) close = std::max(close.value_or(0.0), e.t_open + e.duration);
    }
    return close;
}

std::optional<double> first_door_open(const Scenario& s) {
    std::optional<double> first;
    for (const auto& e : s.door_events) {
        if (!first || e.t_open < *first) first = e.t_open;
    }
    return first;
}

DisturbanceInput disturbance(const Scenario& s, const PlantState& x, double t) {
    DisturbanceInput d;
    d.t_amb = ambient(s, t);
    d.q_occ = occupant_heat(s, t);
    d.q_sol = q_sol(s, t);
    d.q_add = q_add(s, x, t);
    d.p_trac = traction_power(s, t);
    return d;
}

}  // namespace itms
