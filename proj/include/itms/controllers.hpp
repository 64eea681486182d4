#pragma once

// Closed-loop heating strategies sampled at the control period:
//  - HierarchicalController: coolant-split MPC on top, a door-triggered
//    air-distribution MPC underneath;
//  - SingleMpcController: the coolant-split MPC with a fixed air split;
//  - RuleBasedController: battery-first coolant rule with passenger boost.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "itms/optimizer.hpp"
#include "itms/plant.hpp"

namespace itms {

/// Coolant pair in (mdot_b, mdot_c) order.
using CoolantPair = std::array<double, 2>;

enum class CabinFeedback {
    lumped,        ///< upper layer measures the lumped cabin node
    section_mean,  ///< upper layer measures the mass-weighted section mean
};

struct UpperMpcConfig {
    double alpha = 0.6;
    double t_set_c = 23.0;
    double t_set_b = 15.0;
    std::size_t np = 10;
    double dt_ctrl = 5.0;
    double dt_model = 1.0;
    CoolantPair u_min{0.02, 0.02};
    CoolantPair u_max{0.25, 0.25};
    CoolantPair du_min{-0.05, -0.05};
    CoolantPair du_max{0.05, 0.05};
    CoolantPair u_init{0.1, 0.1};
    double t_cab_min = 5.0;
    double t_cab_max = 27.0;
    double t_bat_min = -40.0;
    double t_bat_max = 35.0;
    double rho = 1e3;
    /// Total air inflow of the default equal split, kg/s.
    double air_total = 0.12;
    CabinFeedback cabin_feedback = CabinFeedback::section_mean;
    SolverOptions solver;

    void validate() const;
};

struct LowerMpcConfig {
    SectionArray alpha_sec{1.0, 1.0, 1.0, 1.0};
    double beta = 0.5;
    double t_set_c = 23.0;
    std::size_t np = 10;
    double dt_ctrl = 5.0;
    double dt_model = 1.0;
    SectionArray u_min{0.005, 0.005, 0.005, 0.005};
    SectionArray u_max{0.1, 0.1, 0.1, 0.1};
    SectionArray du_min{-0.04, -0.04, -0.04, -0.04};
    SectionArray du_max{0.04, 0.04, 0.04, 0.04};
    /// Blower capacity on sum(mdot_a), soft.
    double total_cap = 0.12;
    double cap_weight = 1e4;
    double t_floor = 18.0;
    double t_ceil = 30.0;
    double rho = 1e3;
    double recovery_tol = 0.5;  ///< degC
    double timeout = 600.0;     ///< s
    SolverOptions solver;

    void validate() const;
};

struct RuleConfig {
    double t_bound_min = 14.0;
    CoolantPair battery_priority{0.09, 0.05};
    CoolantPair cabin_priority{0.04, 0.09};
    double air_total = 0.12;
    /// Share of air_total sent to a freshly boarded passenger's section.
    double boost_share = 0.3;
    double boost_duration = 120.0;
    /// Rate limits the discrete levels must respect between control samples.
    CoolantPair coolant_du_max{0.05, 0.05};
    double air_du_max = 0.025;

    void validate() const;
};

struct LayerDiagnostics {
    bool ran = false;
    double cost = 0.0;
    int iterations = 0;
    bool converged = true;
};

struct ControllerOutput {
    ControlInput u;
    bool lower_layer_active = false;
    LayerDiagnostics upper;
    LayerDiagnostics lower;
};

/// What a controller sees at a control sample.
struct Observation {
    double t = 0.0;
    PlantState state;
    DisturbanceInput disturbance;
    bool door_open = false;
    std::optional<int> passenger_section;
    /// Predicted q_add for each upcoming control interval (held per interval).
    std::vector<SectionArray> q_add_forecast;
};

/// Equal split of `total` over the sections.
[[nodiscard]] SectionArray equal_air_split(double total);

/// Mass-weighted mean section temperature.
[[nodiscard]] double section_mean(const PlantState& x, const PlantParams& p);

/// Coolant-split MPC over [T_c1..T_c4, T_ha, T_cab, T_cb, T_bat, SOC].
class UpperMpc {
public:
    UpperMpc(UpperMpcConfig cfg, PlantParams model, HeatPumpLaw law);

    /// Solve from `x` (disturbances frozen, air total fixed) and return the
    /// first coolant pair. Keeps the shifted solution as the next warm start.
    CoolantPair step(const PlantState& x, const DisturbanceInput& d, double air_total,
                     const CoolantPair& u_prev, LayerDiagnostics* diag = nullptr);

    /// Build the optimal control problem without solving it.
    [[nodiscard]] OcpSpec problem(const DisturbanceInput& d, double air_total) const;
    [[nodiscard]] static Vector project(const PlantState& x);
    /// Initial prediction state, applying the configured cabin feedback.
    [[nodiscard]] Vector measure(const PlantState& x) const;

    [[nodiscard]] const UpperMpcConfig& config() const noexcept { return cfg_; }
    void reset() { warm_.reset(); }

private:
    UpperMpcConfig cfg_;
    PlantParams model_;
    HeatPumpLaw law_;
    std::optional<InputSequence> warm_;
};

/// Air-distribution MPC over [T_s1..T_s4, T_ha, T_cb]; T_cab and T_c2 are
/// held at their measured values over the horizon.
class LowerMpc {
public:
    LowerMpc(LowerMpcConfig cfg, PlantParams model);

    SectionArray step(const PlantState& x, const DisturbanceInput& d, const SectionArray& u_prev,
                      const std::vector<SectionArray>& q_add_forecast,
                      LayerDiagnostics* diag = nullptr);

    [[nodiscard]] OcpSpec problem(const PlantState& x, const DisturbanceInput& d,
                                  const std::vector<SectionArray>& q_add_forecast) const;
    [[nodiscard]] static Vector project(const PlantState& x);

    [[nodiscard]] const LowerMpcConfig& config() const noexcept { return cfg_; }
    void reset() { warm_.reset(); }

private:
    LowerMpcConfig cfg_;
    PlantParams model_;
    std::optional<InputSequence> warm_;
};

class Controller {
public:
    virtual ~Controller() = default;
    [[nodiscard]] virtual std::string_view name() const = 0;
    /// Input applied before the first sample; also the rate-limit reference.
    [[nodiscard]] virtual ControlInput initial_input() const = 0;
    /// Control intervals of q_add forecast wanted in Observation.
    [[nodiscard]] virtual std::size_t forecast_steps() const { return 0; }
    [[nodiscard]] virtual double control_period() const = 0;
    virtual ControllerOutput step(const Observation& obs) = 0;
};

class SingleMpcController final : public Controller {
public:
    SingleMpcController(UpperMpcConfig upper, PlantParams model, HeatPumpLaw law);
    [[nodiscard]] std::string_view name() const override { return "single_mpc"; }
    [[nodiscard]] ControlInput initial_input() const override;
    [[nodiscard]] double control_period() const override { return upper_.config().dt_ctrl; }
    ControllerOutput step(const Observation& obs) override;

private:
    UpperMpc upper_;
    ControlInput prev_;
};

class HierarchicalController final : public Controller {
public:
    HierarchicalController(UpperMpcConfig upper, LowerMpcConfig lower, PlantParams model,
                           HeatPumpLaw law);
    [[nodiscard]] std::string_view name() const override { return "hierarchical"; }
    [[nodiscard]] ControlInput initial_input() const override;
    [[nodiscard]] std::size_t forecast_steps() const override { return lower_.config().np; }
    [[nodiscard]] double control_period() const override { return upper_.config().dt_ctrl; }
    ControllerOutput step(const Observation& obs) override;

    [[nodiscard]] bool latched() const noexcept { return latched_; }

private:
    UpperMpc upper_;
    LowerMpc lower_;
    ControlInput prev_;
    bool latched_ = false;
    double latch_time_ = 0.0;
};

/// Coolant pair selected by the battery-temperature rule.
[[nodiscard]] CoolantPair rule_coolant_pair(const RuleConfig& cfg, double t_bat);

class RuleBasedController final : public Controller {
public:
    RuleBasedController(RuleConfig cfg, double dt_ctrl);
    [[nodiscard]] std::string_view name() const override { return "rule_based"; }
    [[nodiscard]] ControlInput initial_input() const override;
    [[nodiscard]] double control_period() const override { return dt_ctrl_; }
    ControllerOutput step(const Observation& obs) override;

    /// Explicit-argument form of step().
    ControllerOutput step(const PlantState& x, std::optional<int> passenger_section, double t);

private:
    RuleConfig cfg_;
    double dt_ctrl_;
    std::optional<int> boost_section_;
    double boost_start_ = 0.0;
};

inline constexpr std::array<std::string_view, 3> kControllerNames{"hierarchical", "single_mpc",
                                                                  "rule_based"};

struct ControllerSuite {
    UpperMpcConfig upper;
    LowerMpcConfig lower;
    RuleConfig rule;
};

/// Build a controller by name. Throws ArgumentError for unknown names.
[[nodiscard]] std::unique_ptr<Controller> make_controller(std::string_view name,
                                                          const ControllerSuite& suite,
                                                          const PlantParams& model,
                                                          const HeatPumpLaw& law);

}  // namespace itms
