#include "itms/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "itms/errors.hpp"

namespace itms {
namespace {

// Upper-layer state layout.
enum UpperIdx : std::size_t { kC1, kC2, kC3, kC4, kHa, kCab, kCb, kBat, kSoc, kUpperSize };
// Lower-layer state layout.
enum LowerIdx : std::size_t { kS1 = 0, kLowerHa = 4, kLowerCb = 5, kLowerSize = 6 };

std::size_t substeps(double dt_ctrl, double dt_model) {
    const double n = std::round(dt_ctrl / dt_model);
    if (n < 1.0 || std::abs(n * dt_model - dt_ctrl) > 1e-9 * dt_ctrl) {
        throw ConfigError(fmt::format("control period {} is not a multiple of model step {}",
                                      dt_ctrl, dt_model));
    }
    return static_cast<std::size_t>(n);
}

void check_pair_bounds(const CoolantPair& lo, const CoolantPair& hi, const char* what) {
    for (std::size_t j = 0; j < 2; ++j) {
        if (!(lo[j] <= hi[j])) throw ConfigError(fmt::format("{}: min exceeds max", what));
    }
}

double slew(double from, double to, double du_min, double du_max) {
    const auto [a, b] = rate_window(from, -INFINITY, INFINITY, du_min, du_max);
    return std::clamp(to, a, b);
}

}  // namespace

SectionArray equal_air_split(double total) {
    const double each = total / static_cast<double>(kSections);
    return {each, each, each, each};
}

double section_mean(const PlantState& x, const PlantParams& p) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < kSections; ++i) {
        num += p.m_s[i] * x.t_s[i];
        den += p.m_s[i];
    }
    return num / den;
}

void UpperMpcConfig::validate() const {
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("upper alpha must lie in [0, 1]");
    if (np < 1) throw ConfigError("upper horizon must be at least one step");
    if (!(dt_model > 0.0) || dt_model > 1.0) throw ConfigError("upper dt_model must be in (0, 1]");
    (void)substeps(dt_ctrl, dt_model);
    check_pair_bounds(u_min, u_max, "upper coolant bounds");
    for (std::size_t j = 0; j < 2; ++j) {
        if (!(u_min[j] > 0.0)) throw ConfigError("upper coolant minimum must be positive");
        if (!(du_min[j] <= 0.0 && du_max[j] >= 0.0)) {
            throw ConfigError("upper rate bounds must bracket zero");
        }
        if (u_init[j] < u_min[j] || u_init[j] > u_max[j]) {
            throw ConfigError("upper initial coolant flow outside its box");
        }
    }
    if (!(air_total > 0.0)) throw ConfigError("air_total must be positive");
    if (!(t_cab_min <= t_cab_max) || !(t_bat_min <= t_bat_max)) {
        throw ConfigError("upper soft bounds inverted");
    }
}

void LowerMpcConfig::validate() const {
    if (np < 1) throw ConfigError("lower horizon must be at least one step");
    if (beta < 0.0) throw ConfigError("lower beta must be non-negative");
    if (!(dt_model > 0.0) || dt_model > 1.0) throw ConfigError("lower dt_model must be in (0, 1]");
    (void)substeps(dt_ctrl, dt_model);
    for (std::size_t i = 0; i < kSections; ++i) {
        if (alpha_sec[i] < 0.0) throw ConfigError("lower alpha_sec must be non-negative");
        if (!(u_min[i] <= u_max[i]) || u_min[i] < 0.0) {
            throw ConfigError("lower air bounds invalid");
        }
        if (!(du_min[i] <= 0.0 && du_max[i] >= 0.0)) {
            throw ConfigError("lower rate bounds must bracket zero");
        }
    }
    if (!(recovery_tol > 0.0) || !(timeout > 0.0)) {
        throw ConfigError("recovery tolerance and timeout must be positive");
    }
}

void RuleConfig::validate() const {
    if (!(battery_priority[0] > battery_priority[1])) {
        throw ConfigError("battery-priority pair must have mdot_b > mdot_c");
    }
    if (!(cabin_priority[0] <= cabin_priority[1])) {
        throw ConfigError("cabin-priority pair must have mdot_b <= mdot_c");
    }
    if (!(battery_priority[1] > 0.0) || !(cabin_priority[0] > 0.0)) {
        throw ConfigError("rule coolant flows must be positive");
    }
    for (std::size_t j = 0; j < 2; ++j) {
        if (std::abs(battery_priority[j] - cabin_priority[j]) > coolant_du_max[j]) {
            throw ConfigError("switching between rule coolant pairs exceeds the rate limit");
        }
    }
    if (!(air_total > 0.0)) throw ConfigError("rule air_total must be positive");
    if (boost_share < 0.25 || boost_share > 1.0) {
        throw ConfigError("boost_share must lie in [0.25, 1]");
    }
    const double base = air_total / 4.0;
    const double hi = boost_share * air_total;
    const double lo = (1.0 - boost_share) / 3.0 * air_total;
    if (std::max({hi - base, base - lo, hi - lo}) > air_du_max) {
        throw ConfigError("boost split changes exceed the air rate limit");
    }
    if (!(boost_duration > 0.0)) throw ConfigError("boost duration must be positive");
}

// ---------------------------------------------------------------------------

UpperMpc::UpperMpc(UpperMpcConfig cfg, PlantParams model, HeatPumpLaw law)
    : cfg_(std::move(cfg)), model_(std::move(model)), law_(law) {
    cfg_.validate();
}

Vector UpperMpc::project(const PlantState& x) {
    return {x.t_c1, x.t_c2, x.t_c3, x.t_c4, x.t_ha, x.t_cab, x.t_cb, x.t_bat, x.soc};
}

Vector UpperMpc::measure(const PlantState& x) const {
    Vector v = project(x);
    if (cfg_.cabin_feedback == CabinFeedback::section_mean) v[kCab] = section_mean(x, model_);
    return v;
}

OcpSpec UpperMpc::problem(const DisturbanceInput& d, double air_total) const {
    OcpSpec spec;
    spec.horizon_np = cfg_.np;
    spec.dt = cfg_.dt_ctrl;
    spec.n_u = 2;
    spec.u_min = {cfg_.u_min[0], cfg_.u_min[1]};
    spec.u_max = {cfg_.u_max[0], cfg_.u_max[1]};
    spec.du_min = {cfg_.du_min[0], cfg_.du_min[1]};
    spec.du_max = {cfg_.du_max[0], cfg_.du_max[1]};
    spec.state_bounds = {{kCab, cfg_.t_cab_min, cfg_.t_cab_max},
                         {kBat, cfg_.t_bat_min, cfg_.t_bat_max}};
    spec.rho = cfg_.rho;

    const std::size_t n_sub = substeps(cfg_.dt_ctrl, cfg_.dt_model);
    const double h = cfg_.dt_model;
    const PlantParams model = model_;
    const HeatPumpLaw law = law_;
    const SectionArray air = equal_air_split(air_total);
    spec.dynamics = [model, law, air, d, n_sub, h](const Vector& xv, std::span<const double> u,
                                                   std::size_t) {
        ControlInput in;
        in.mdot_b = u[0];
        in.mdot_c = u[1];
        in.mdot_a = air;
        std::array<double, kUpperSize> x{};
        std::copy(xv.begin(), xv.end(), x.begin());
        auto deriv = [&](const std::array<double, kUpperSize>& a) {
            PlantState s;
            s.t_c1 = a[kC1];
            s.t_c2 = a[kC2];
            s.t_c3 = a[kC3];
            s.t_c4 = a[kC4];
            s.t_ha = a[kHa];
            s.t_cab = a[kCab];
            s.t_cb = a[kCb];
            s.t_s.fill(a[kCab]);
            s.t_bat = a[kBat];
            s.soc = std::clamp(a[kSoc], 0.0, 1.0);
            const double q_hp = law.command(s, model);
            const CabinRates cabin = lumped_cabin_deriv(s, model, in, d);
            const auto coolant = coolant_deriv(s, model, in, q_hp);
            const BatteryRates bat = battery_soc_deriv(s, model, in, d, q_hp);
            return std::array<double, kUpperSize>{coolant[0], coolant[1], coolant[2],
                                                  coolant[3], heated_air_deriv(s, model, in),
                                                  cabin.d_cab, cabin.d_cb, bat.d_bat,
                                                  bat.d_soc};
        };
        for (std::size_t i = 0; i < n_sub; ++i) x = rk4_step(x, h, deriv);
        return Vector(x.begin(), x.end());
    };
    const double alpha = cfg_.alpha, t_c = cfg_.t_set_c, t_b = cfg_.t_set_b;
    spec.stage_cost = [alpha, t_c, t_b](const Vector& x, std::span<const double>,
                                        std::span<const double>, std::size_t) {
        const double ec = t_c - x[kCab];
        const double eb = t_b - x[kBat];
        return alpha * ec * ec + (1.0 - alpha) * eb * eb;
    };
    return spec;
}

CoolantPair UpperMpc::step(const PlantState& x, const DisturbanceInput& d, double air_total,
                           const CoolantPair& u_prev, LayerDiagnostics* diag) {
    const OcpSpec spec = problem(d, air_total);
    const Vector x0 = measure(x);
    std::optional<InputSequence> warm;
    if (warm_) warm = warm_->shifted();
    SolveResult r;
    try {
        r = solve(spec, x0, u_prev, warm, cfg_.solver);
    } catch (const InfeasibleError& e) {
        throw InfeasibleError(fmt::format("upper layer: {}", e.what()));
    }
    warm_ = r.u_seq;
    if (diag) *diag = {true, r.cost, r.iterations, r.converged};
    return {r.u_seq(0, 0), r.u_seq(0, 1)};
}

// ---------------------------------------------------------------------------

LowerMpc::LowerMpc(LowerMpcConfig cfg, PlantParams model)
    : cfg_(std::move(cfg)), model_(std::move(model)) {
    cfg_.validate();
}

Vector LowerMpc::project(const PlantState& x) {
    return {x.t_s[0], x.t_s[1], x.t_s[2], x.t_s[3], x.t_ha, x.t_cb};
}

OcpSpec LowerMpc::problem(const PlantState& x, const DisturbanceInput& d,
                          const std::vector<SectionArray>& q_add_forecast) const {
    OcpSpec spec;
    spec.horizon_np = cfg_.np;
    spec.dt = cfg_.dt_ctrl;
    spec.n_u = kSections;
    spec.u_min.assign(cfg_.u_min.begin(), cfg_.u_min.end());
    spec.u_max.assign(cfg_.u_max.begin(), cfg_.u_max.end());
    spec.du_min.assign(cfg_.du_min.begin(), cfg_.du_min.end());
    spec.du_max.assign(cfg_.du_max.begin(), cfg_.du_max.end());
    for (std::size_t i = 0; i < kSections; ++i) {
        spec.state_bounds.push_back({kS1 + i, cfg_.t_floor, cfg_.t_ceil});
    }
    spec.rho = cfg_.rho;

    // Forecast per control interval; the last entry is held past its end.
    std::vector<SectionArray> forecast = q_add_forecast;
    if (forecast.empty()) forecast.push_back(d.q_add);

    const std::size_t n_sub = substeps(cfg_.dt_ctrl, cfg_.dt_model);
    const double h = cfg_.dt_model;
    const PlantParams model = model_;
    const PlantState frozen = x;
    spec.dynamics = [model, frozen, d, forecast, n_sub, h](
                        const Vector& xv, std::span<const double> u, std::size_t k) {
        DisturbanceInput dk = d;
        dk.q_add = forecast[std::min(k, forecast.size() - 1)];
        ControlInput in;
        in.mdot_b = 1.0;  // unused by the air-side balances
        in.mdot_c = 1.0;
        std::copy(u.begin(), u.end(), in.mdot_a.begin());
        std::array<double, kLowerSize> x{};
        std::copy(xv.begin(), xv.end(), x.begin());
        auto deriv = [&](const std::array<double, kLowerSize>& a) {
            PlantState s = frozen;
            std::copy_n(a.begin(), kSections, s.t_s.begin());
            s.t_ha = a[kLowerHa];
            s.t_cb = a[kLowerCb];
            const SectionArray ds = sections_deriv(s, model, in, dk);
            const CabinRates cabin = lumped_cabin_deriv(s, model, in, dk);
            return std::array<double, kLowerSize>{ds[0], ds[1], ds[2], ds[3],
                                                  heated_air_deriv(s, model, in), cabin.d_cb};
        };
        for (std::size_t i = 0; i < n_sub; ++i) x = rk4_step(x, h, deriv);
        return Vector(x.begin(), x.end());
    };
    const SectionArray w = cfg_.alpha_sec;
    const double beta = cfg_.beta, t_set = cfg_.t_set_c, cap = cfg_.total_cap,
                 cap_w = cfg_.cap_weight;
    spec.stage_cost = [w, beta, t_set, cap, cap_w](const Vector& x, std::span<const double> u,
                                                   std::span<const double> du, std::size_t) {
        double c = 0.0, total = 0.0;
        for (std::size_t i = 0; i < kSections; ++i) {
            const double e = x[kS1 + i] - t_set;
            c += w[i] * e * e + beta * du[i] * du[i];
            total += u[i];
        }
        const double over = std::max(0.0, total - cap);
        return c + cap_w * over * over;
    };
    return spec;
}

SectionArray LowerMpc::step(const PlantState& x, const DisturbanceInput& d,
                            const SectionArray& u_prev,
                            const std::vector<SectionArray>& q_add_forecast,
                            LayerDiagnostics* diag) {
    const OcpSpec spec = problem(x, d, q_add_forecast);
    const Vector x0 = project(x);
    std::optional<InputSequence> warm;
    if (warm_) warm = warm_->shifted();
    SolveResult r;
    try {
        r = solve(spec, x0, u_prev, warm, cfg_.solver);
    } catch (const InfeasibleError& e) {
        throw InfeasibleError(fmt::format("lower layer: {}", e.what()));
    }
    warm_ = r.u_seq;
    if (diag) *diag = {true, r.cost, r.iterations, r.converged};
    SectionArray out{};
    for (std::size_t i = 0; i < kSections; ++i) out[i] = r.u_seq(0, i);
    return out;
}

// ---------------------------------------------------------------------------

SingleMpcController::SingleMpcController(UpperMpcConfig upper, PlantParams model,
                                         HeatPumpLaw law)
    : upper_(std::move(upper), std::move(model), law), prev_(initial_input()) {}

ControlInput SingleMpcController::initial_input() const {
    const auto& c = upper_.config();
    return {c.u_init[0], c.u_init[1], equal_air_split(c.air_total)};
}

ControllerOutput SingleMpcController::step(const Observation& obs) {
    ControllerOutput out;
    const CoolantPair split = upper_.step(obs.state, obs.disturbance, prev_.total_air(),
                                          {prev_.mdot_b, prev_.mdot_c}, &out.upper);
    out.u = {split[0], split[1], equal_air_split(upper_.config().air_total)};
    prev_ = out.u;
    return out;
}

HierarchicalController::HierarchicalController(UpperMpcConfig upper, LowerMpcConfig lower,
                                               PlantParams model, HeatPumpLaw law)
    : upper_(std::move(upper), model, law), lower_(std::move(lower), model),
      prev_(initial_input()) {}

ControlInput HierarchicalController::initial_input() const {
    const auto& c = upper_.config();
    return {c.u_init[0], c.u_init[1], equal_air_split(c.air_total)};
}

ControllerOutput HierarchicalController::step(const Observation& obs) {
    ControllerOutput out;
    const CoolantPair split = upper_.step(obs.state, obs.disturbance, prev_.total_air(),
                                          {prev_.mdot_b, prev_.mdot_c}, &out.upper);
    out.u.mdot_b = split[0];
    out.u.mdot_c = split[1];

    const auto& lc = lower_.config();
    if (obs.door_open) {
        if (!latched_) latch_time_ = obs.t;
        latched_ = true;
    } else if (latched_) {
        const bool recovered = std::all_of(obs.state.t_s.begin(), obs.state.t_s.end(),
                                           [&](double ts) {
                                               return std::abs(ts - lc.t_set_c) <= lc.recovery_tol;
                                           });
        if (recovered || obs.t - latch_time_ >= lc.timeout) latched_ = false;
    }

    if (latched_) {
        out.u.mdot_a = lower_.step(obs.state, obs.disturbance, prev_.mdot_a, obs.q_add_forecast,
                                   &out.lower);
        out.lower_layer_active = true;
    } else {
        lower_.reset();
        const SectionArray target = equal_air_split(upper_.config().air_total);
        for (std::size_t i = 0; i < kSections; ++i) {
            out.u.mdot_a[i] = slew(prev_.mdot_a[i], target[i], lc.du_min[i], lc.du_max[i]);
        }
    }
    prev_ = out.u;
    return out;
}

// ---------------------------------------------------------------------------

CoolantPair rule_coolant_pair(const RuleConfig& cfg, double t_bat) {
    return t_bat < cfg.t_bound_min ? cfg.battery_priority : cfg.cabin_priority;
}

RuleBasedController::RuleBasedController(RuleConfig cfg, double dt_ctrl)
    : cfg_(std::move(cfg)), dt_ctrl_(dt_ctrl) {
    cfg_.validate();
    if (!(dt_ctrl_ > 0.0)) throw ConfigError("rule-based control period must be positive");
}

ControlInput RuleBasedController::initial_input() const {
    return {cfg_.battery_priority[0], cfg_.battery_priority[1], equal_air_split(cfg_.air_total)};
}

ControllerOutput RuleBasedController::step(const Observation& obs) {
    return step(obs.state, obs.passenger_section, obs.t);
}

ControllerOutput RuleBasedController::step(const PlantState& x,
                                           std::optional<int> passenger_section, double t) {
    if (passenger_section && passenger_section != boost_section_) {
        boost_section_ = passenger_section;
        boost_start_ = t;
    }
    if (boost_section_ && t - boost_start_ >= cfg_.boost_duration) boost_section_.reset();

    ControllerOutput out;
    const CoolantPair pair = rule_coolant_pair(cfg_, x.t_bat);
    out.u.mdot_b = pair[0];
    out.u.mdot_c = pair[1];
    if (boost_section_) {
        const double others = (1.0 - cfg_.boost_share) / 3.0 * cfg_.air_total;
        out.u.mdot_a.fill(others);
        out.u.mdot_a[static_cast<std::size_t>(*boost_section_ - 1)] =
            cfg_.boost_share * cfg_.air_total;
    } else {
        out.u.mdot_a = equal_air_split(cfg_.air_total);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::unique_ptr<Controller> make_controller(std::string_view name, const ControllerSuite& suite,
                                            const PlantParams& model, const HeatPumpLaw& law) {
    if (name == "hierarchical") {
        return std::make_unique<HierarchicalController>(suite.upper, suite.lower, model, law);
    }
    if (name == "single_mpc") {
        return std::make_unique<SingleMpcController>(suite.upper, model, law);
    }
    if (name == "rule_based") {
        return std::make_unique<RuleBasedController>(suite.rule, suite.upper.dt_ctrl);
    }
    throw ArgumentError(fmt::format("unknown controller '{}'", name));
}

}  // namespace itms
