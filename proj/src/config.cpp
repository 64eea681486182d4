#include "itms/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "itms/errors.hpp"

namespace itms {
namespace {

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

double to_double(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw ConfigError(fmt::format("{}: expected a number", path));
    try {
        return n.as<double>();
    } catch (const YAML::Exception&) {
        throw ConfigError(fmt::format("{}: '{}' is not a number", path, n.Scalar()));
    }
}

template <std::size_t N>
std::array<double, N> to_array(const YAML::Node& n, const std::string& path) {
    if (!n.IsSequence() || n.size() != N) {
        throw ConfigError(fmt::format("{}: expected a list of {} numbers", path, N));
    }
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = to_double(n[i], fmt::format("{}[{}]", path, i));
    return out;
}

/// Typed access to one YAML map that remembers which keys were read.
class Section {
public:
    Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) {
            throw ConfigError(fmt::format("{}: expected a mapping", path_.empty() ? "<root>" : path_));
        }
    }

    [[nodiscard]] bool has(const std::string& key) const {
        return node_ && node_.IsMap() && node_[key];
    }

    YAML::Node raw(const std::string& key) {
        seen_.insert(key);
        return has(key) ? node_[key] : YAML::Node();
    }

    [[nodiscard]] std::string path(const std::string& key) const { return join(path_, key); }

    void read(const std::string& key, double& out) {
        if (has(key)) out = to_double(raw(key), path(key));
        seen_.insert(key);
    }

    void read(const std::string& key, std::size_t& out) {
        if (!has(key)) {
            seen_.insert(key);
            return;
        }
        const double v = to_double(raw(key), path(key));
        if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
            throw ConfigError(fmt::format("{}: expected a non-negative integer", path(key)));
        }
        out = static_cast<std::size_t>(v);
    }

    void read(const std::string& key, int& out) {
        if (!has(key)) {
            seen_.insert(key);
            return;
        }
        const double v = to_double(raw(key), path(key));
        if (v != static_cast<double>(static_cast<int>(v))) {
            throw ConfigError(fmt::format("{}: expected an integer", path(key)));
        }
        out = static_cast<int>(v);
    }

    template <std::size_t N>
    void read(const std::string& key, std::array<double, N>& out) {
        if (has(key)) out = to_array<N>(raw(key), path(key));
        seen_.insert(key);
    }

    /// Throws on keys that no read() asked for.
    void finish() const {
        if (!node_ || !node_.IsMap()) return;
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!seen_.count(key)) throw ConfigError(fmt::format("unknown key '{}'", path(key)));
        }
    }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<Breakpoint> read_table(const YAML::Node& n, const std::string& path) {
    if (!n.IsSequence()) throw ConfigError(fmt::format("{}: expected a list of [t, value]", path));
    std::vector<Breakpoint> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const auto pair = to_array<2>(n[i], fmt::format("{}[{}]", path, i));
        out.push_back({pair[0], pair[1]});
    }
    return out;
}

void read_scenario(Section s, Scenario& sc) {
    s.read("duration", sc.duration);
    s.read("t_set_cab", sc.t_set_cab);
    s.read("t_set_bat", sc.t_set_bat);
    if (s.has("ambient")) sc.t_amb_profile = read_table(s.raw("ambient"), s.path("ambient"));
    if (s.has("solar")) sc.q_sol_profile = read_table(s.raw("solar"), s.path("solar"));
    if (s.has("drive_cycle")) {
        sc.drive_cycle = read_table(s.raw("drive_cycle"), s.path("drive_cycle"));
    }
    if (s.has("doors")) {
        const auto list = s.raw("doors");
        if (!list.IsSequence()) throw ConfigError(fmt::format("{}: expected a list", s.path("doors")));
        sc.door_events.clear();
        for (std::size_t i = 0; i < list.size(); ++i) {
            Section e(list[i], fmt::format("{}[{}]", s.path("doors"), i));
            DoorEvent ev;
            e.read("t_open", ev.t_open);
            e.read("duration", ev.duration);
            e.read("section", ev.section);
            e.finish();
            sc.door_events.push_back(ev);
        }
    }
    if (s.has("passengers")) {
        const auto list = s.raw("passengers");
        if (!list.IsSequence()) {
            throw ConfigError(fmt::format("{}: expected a list", s.path("passengers")));
        }
        sc.passenger_events.clear();
        for (std::size_t i = 0; i < list.size(); ++i) {
            Section e(list[i], fmt::format("{}[{}]", s.path("passengers"), i));
            PassengerEvent ev;
            e.read("t_board", ev.t_board);
            e.read("section", ev.section);
            e.read("heat", ev.q_occ_person);
            e.finish();
            sc.passenger_events.push_back(ev);
        }
    }
    s.read("propagation_delay", sc.propagation_delay);
    s.read("door_loss_coeff", sc.door_loss_coeff);
    s.read("spread_fractions", sc.spread_fractions);
    s.read("passenger_window", sc.passenger_window);
    s.read("initial_temperature", sc.initial_temperature);
    if (s.has("initial_battery_temperature")) {
        double v = 0.0;
        s.read("initial_battery_temperature", v);
        sc.initial_battery_temperature = v;
    }
    s.read("initial_soc", sc.initial_soc);
    s.finish();
}

void read_plant(Section s, PlantParams& p) {
    s.read("alpha_cab", p.alpha_cab);
    s.read("alpha_cb", p.alpha_cb);
    s.read("a_cb", p.a_cb);
    s.read("a_cb_sec", p.a_cb_sec);
    s.read("m_a", p.m_a);
    s.read("m_s", p.m_s);
    s.read("m_cb", p.m_cb);
    s.read("c_a", p.c_a);
    s.read("c_cb", p.c_cb);
    s.read("gamma_hx", p.gamma_hx);
    s.read("gamma_bat", p.gamma_bat);
    s.read("m_c_node", p.m_c_node);
    s.read("c_cool", p.c_cool);
    s.read("q_hp_max", p.q_hp_max);
    s.read("cop", p.cop);
    s.read("m_bat", p.m_bat);
    s.read("c_bat", p.c_bat);
    s.read("e_batt", p.e_batt);
    s.read("r_eff", p.r_eff);
    s.read("v_nom", p.v_nom);
    s.read("pump_power_coeff", p.pump_power_coeff);
    s.read("pump_capacity", p.pump_capacity);
    s.finish();
}

void read_solver(Section s, SolverOptions& o) {
    s.read("max_iterations", o.max_iterations);
    s.read("fd_step", o.fd_step);
    s.read("tolerance", o.tolerance);
    s.finish();
}

void read_upper(Section s, UpperMpcConfig& c, const Scenario& sc) {
    c.t_set_c = sc.t_set_cab;
    c.t_set_b = sc.t_set_bat;
    s.read("alpha", c.alpha);
    s.read("t_set_c", c.t_set_c);
    s.read("t_set_b", c.t_set_b);
    s.read("np", c.np);
    s.read("dt_ctrl", c.dt_ctrl);
    s.read("dt_model", c.dt_model);
    s.read("u_min", c.u_min);
    s.read("u_max", c.u_max);
    s.read("du_min", c.du_min);
    s.read("du_max", c.du_max);
    s.read("u_init", c.u_init);
    s.read("t_cab_min", c.t_cab_min);
    s.read("t_cab_max", c.t_cab_max);
    s.read("t_bat_min", c.t_bat_min);
    s.read("t_bat_max", c.t_bat_max);
    s.read("rho", c.rho);
    s.read("air_total", c.air_total);
    if (s.has("cabin_feedback")) {
        const auto v = s.raw("cabin_feedback");
        const auto text = v.IsScalar() ? v.Scalar() : std::string();
        if (text == "lumped") {
            c.cabin_feedback = CabinFeedback::lumped;
        } else if (text == "section_mean") {
            c.cabin_feedback = CabinFeedback::section_mean;
        } else {
            throw ConfigError(fmt::format("{}: expected 'lumped' or 'section_mean'",
                                          s.path("cabin_feedback")));
        }
    }
    read_solver(Section(s.raw("solver"), s.path("solver")), c.solver);
    s.finish();
}

void read_lower(Section s, LowerMpcConfig& c, const Scenario& sc) {
    c.t_set_c = sc.t_set_cab;
    s.read("alpha_sec", c.alpha_sec);
    s.read("beta", c.beta);
    s.read("t_set_c", c.t_set_c);
    s.read("np", c.np);
    s.read("dt_ctrl", c.dt_ctrl);
    s.read("dt_model", c.dt_model);
    s.read("u_min", c.u_min);
    s.read("u_max", c.u_max);
    s.read("du_min", c.du_min);
    s.read("du_max", c.du_max);
    s.read("total_cap", c.total_cap);
    s.read("cap_weight", c.cap_weight);
    s.read("t_floor", c.t_floor);
    s.read("t_ceil", c.t_ceil);
    s.read("rho", c.rho);
    s.read("recovery_tol", c.recovery_tol);
    s.read("timeout", c.timeout);
    read_solver(Section(s.raw("solver"), s.path("solver")), c.solver);
    s.finish();
}

void read_rule(Section s, RuleConfig& c) {
    s.read("t_bound_min", c.t_bound_min);
    s.read("battery_priority", c.battery_priority);
    s.read("cabin_priority", c.cabin_priority);
    s.read("air_total", c.air_total);
    s.read("boost_share", c.boost_share);
    s.read("boost_duration", c.boost_duration);
    s.read("coolant_du_max", c.coolant_du_max);
    s.read("air_du_max", c.air_du_max);
    s.finish();
}

/// Set root[a][b]...[z] = value for a dotted key path.
void apply_override(YAML::Node& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError(fmt::format("override '{}' is not key=value", assignment));
    }
    const std::string key = assignment.substr(0, eq);
    YAML::Node value;
    try {
        value = YAML::Load(assignment.substr(eq + 1));
    } catch (const YAML::Exception& e) {
        throw ConfigError(fmt::format("override '{}': {}", assignment, e.what()));
    }
    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string part; std::getline(ss, part, '.');) {
        if (part.empty()) throw ConfigError(fmt::format("override key '{}' is malformed", key));
        parts.push_back(part);
    }
    // yaml-cpp nodes are handles; walk with fresh handles so assignment
    // rebinds children instead of overwriting parents.
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        YAML::Node next = chain.back()[parts[i]];
        if (next.IsDefined() && !next.IsNull() && !next.IsMap()) {
            throw ConfigError(fmt::format("override key '{}': '{}' is not a mapping", key, parts[i]));
        }
        if (!next.IsDefined() || next.IsNull()) {
            chain.back()[parts[i]] = YAML::Node(YAML::NodeType::Map);
            next = chain.back()[parts[i]];
        }
        chain.push_back(next);
    }
    chain.back()[parts.back()] = value;
}

}  // namespace

void RunConfig::validate() const {
    scenario.validate();
    plant.validate();
    model.validate();
    if (!(simulation.dt > 0.0) || simulation.dt > 1.0) {
        throw ConfigError("simulation.dt must lie in (0, 1]");
    }
    if (!(simulation.heat_pump.band > 0.0)) {
        throw ConfigError("simulation.heat_pump_band must be positive");
    }
    controllers.upper.validate();
    controllers.lower.validate();
    controllers.rule.validate();
}

RunConfig parse_config(const std::string& yaml_text, const std::vector<std::string>& overrides) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(fmt::format("YAML parse error: {}", e.what()));
    }
    if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    for (const auto& o : overrides) apply_override(root, o);

    RunConfig cfg;
    Section top(root, "");
    read_scenario(Section(top.raw("scenario"), "scenario"), cfg.scenario);
    read_plant(Section(top.raw("plant"), "plant"), cfg.plant);
    cfg.model = cfg.plant;
    read_plant(Section(top.raw("prediction_plant"), "prediction_plant"), cfg.model);
    {
        Section sim(top.raw("simulation"), "simulation");
        sim.read("dt", cfg.simulation.dt);
        sim.read("heat_pump_band", cfg.simulation.heat_pump.band);
        sim.finish();
    }
    cfg.simulation.heat_pump.t_set_cab = cfg.scenario.t_set_cab;
    cfg.simulation.heat_pump.t_set_bat = cfg.scenario.t_set_bat;
    {
        Section ctl(top.raw("controllers"), "controllers");
        read_upper(Section(ctl.raw("upper"), "controllers.upper"), cfg.controllers.upper,
                   cfg.scenario);
        read_lower(Section(ctl.raw("lower"), "controllers.lower"), cfg.controllers.lower,
                   cfg.scenario);
        read_rule(Section(ctl.raw("rule_based"), "controllers.rule_based"), cfg.controllers.rule);
        ctl.finish();
    }
    top.finish();
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError(fmt::format("cannot open config '{}'", path));
    std::stringstream buf;
    buf << is.rdbuf();
    try {
        return parse_config(buf.str(), overrides);
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", path, e.what()));
    }
}

}  // namespace itms
