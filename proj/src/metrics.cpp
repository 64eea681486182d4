#include "itms/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include "json.hpp"

#include "itms/controllers.hpp"
#include "itms/errors.hpp"

namespace itms {

Trace slice(const Trace& trace, const Window& w) {
    Trace out;
    for (const auto& r : trace) {
        if (r.t >= w.begin && r.t <= w.end) out.push_back(r);
    }
    return out;
}

double section_drop(const Trace& trace, int section, const Window& w) {
    if (section < 1 || section > static_cast<int>(kSections)) {
        throw ArgumentError(fmt::format("section {} outside 1..{}", section, kSections));
    }
    const auto i = static_cast<std::size_t>(section - 1);
    const Trace in = slice(trace, w);
    if (in.empty()) {
        throw ArgumentError(fmt::format("window [{}, {}] holds no records", w.begin, w.end));
    }
    double lowest = in.front().state.t_s[i];
    for (const auto& r : in) lowest = std::min(lowest, r.state.t_s[i]);
    return in.front().state.t_s[i] - lowest;
}

double section_gap(const PlantState& x) {
    const auto [lo, hi] = std::minmax_element(x.t_s.begin(), x.t_s.end());
    return *hi - *lo;
}

GapSeries max_section_gap(const Trace& trace) {
    GapSeries g;
    g.t.reserve(trace.size());
    g.gap.reserve(trace.size());
    for (const auto& r : trace) {
        const double v = section_gap(r.state);
        g.t.push_back(r.t);
        g.gap.push_back(v);
        g.max = std::max(g.max, v);
    }
    return g;
}

double overshoot(const Trace& trace, const PlantParams& p, double t_set, double from_t) {
    double worst = 0.0;
    for (const auto& r : trace) {
        if (r.t >= from_t) worst = std::max(worst, section_mean(r.state, p) - t_set);
    }
    return worst;
}

std::optional<double> recovery_time(const Trace& trace, double t_set, double delta, double from_t,
                                    double dwell) {
    if (!(delta > 0.0)) throw ArgumentError("recovery tolerance must be positive");
    std::optional<double> run_start;
    for (const auto& r : trace) {
        if (r.t < from_t) continue;
        const bool inside = std::all_of(r.state.t_s.begin(), r.state.t_s.end(),
                                        [&](double v) { return std::abs(v - t_set) <= delta; });
        if (!inside) {
            run_start.reset();
            continue;
        }
        if (!run_start) run_start = r.t;
        if (r.t - *run_start >= dwell) return *run_start - from_t;
    }
    return std::nullopt;
}

double reduction_pct(double baseline, double proposed) {
    if (!(baseline > 0.0)) {
        throw ArgumentError(fmt::format("reduction needs a positive baseline, got {}", baseline));
    }
    return 100.0 * (baseline - proposed) / baseline;
}

double energy_consumed(const Trace& trace, const PlantParams& p) {
    double e = 0.0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        const double a = thermal_electric_power(p, trace[i - 1].u, trace[i - 1].q_hp);
        const double b = thermal_electric_power(p, trace[i].u, trace[i].q_hp);
        e += 0.5 * (a + b) * (trace[i].t - trace[i - 1].t);
    }
    return e;
}

MetricsReport compute_report(const Trace& trace, const Scenario& scenario, const PlantParams& p,
                             const MetricsOptions& options) {
    if (trace.empty()) throw ArgumentError("empty trace");
    MetricsReport r;
    r.t_ref = first_door_open(scenario).value_or(trace.front().t);
    r.window = {r.t_ref, std::min(r.t_ref + options.drop_window, trace.back().t)};
    for (int s = 1; s <= static_cast<int>(kSections); ++s) {
        r.drop[static_cast<std::size_t>(s - 1)] = section_drop(trace, s, r.window);
    }
    r.gap = max_section_gap(trace);
    const Trace in = slice(trace, r.window);
    r.max_gap = max_section_gap(in).max;
    r.overshoot = overshoot(in, p, scenario.t_set_cab, r.t_ref);
    r.recovery_time =
        recovery_time(trace, scenario.t_set_cab, options.recovery_tol, r.t_ref, options.dwell);
    r.energy = energy_consumed(trace, p);
    return r;
}

std::string report_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["t_ref"] = r.t_ref;
    j["window"] = {r.window.begin, r.window.end};
    j["section_drop"] = r.drop;
    j["max_gap"] = r.max_gap;
    j["overshoot"] = r.overshoot;
    j["recovery_time"] = r.recovery_time ? nlohmann::ordered_json(*r.recovery_time) : nullptr;
    j["energy_j"] = r.energy;
    j["gap_series"] = {{"t", r.gap.t}, {"gap", r.gap.gap}, {"max", r.gap.max}};
    return j.dump(2) + "\n";
}

namespace {

std::string pct_cell(double baseline, double proposed) {
    if (!(baseline > 0.0)) return fmt::format("{:>10}", "n/a");
    return fmt::format("{:>10.2f}", reduction_pct(baseline, proposed));
}

}  // namespace

std::string comparison_table(const std::vector<std::pair<std::string, MetricsReport>>& reports) {
    std::string out = fmt::format("{:<14}{:>10}{:>10}{:>10}{:>12}{:>14}\n", "controller",
                                  "drop_s4", "max_gap", "overshoot", "recovery_s", "energy_kj");
    for (const auto& [name, r] : reports) {
        const std::string rec =
            r.recovery_time ? fmt::format("{:.0f}", *r.recovery_time) : std::string("none");
        out += fmt::format("{:<14}{:>10.4f}{:>10.4f}{:>10.4f}{:>12}{:>14.1f}\n", name, r.drop[3],
                           r.max_gap, r.overshoot, rec, r.energy / 1e3);
    }
    out += "\nreduction % (proposed vs baseline)\n";
    out += fmt::format("{:<14}{:<14}{:>10}{:>10}{:>10}\n", "proposed", "baseline", "drop_s4",
                       "max_gap", "overshoot");
    for (const auto& [a, ra] : reports) {
        for (const auto& [b, rb] : reports) {
            if (a == b) continue;
            out += fmt::format("{:<14}{:<14}{}{}{}\n", a, b, pct_cell(rb.drop[3], ra.drop[3]),
                               pct_cell(rb.max_gap, ra.max_gap),
                               pct_cell(rb.overshoot, ra.overshoot));
        }
    }
    return out;
}

}  // namespace itms
