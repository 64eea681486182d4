#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "itms/optimizer.hpp"
#include "itms/simulation.hpp"

namespace itms::testing {

inline std::string config_path(const std::string& name) {
    return std::string(ITMS_SOURCE_DIR) + "/configs/" + name;
}

/// Trace whose sections all follow f(t) on t = 0, 1, ..., n-1.
inline Trace uniform_trace(std::size_t n, const std::function<double(double)>& f) {
    Trace tr;
    for (std::size_t i = 0; i < n; ++i) {
        TraceRecord r;
        r.t = static_cast<double>(i);
        r.state = PlantState::uniform(f(r.t), 0.8);
        tr.push_back(r);
    }
    return tr;
}

/// Random scalar-or-pair heating toy: each state relaxes to ambient and is
/// heated in proportion to its input, cost tracks a setpoint with a small
/// input and rate penalty plus a soft upper bound.
struct ToyInstance {
    OcpSpec spec;
    Vector x0;
    Vector u_prev;
};

inline ToyInstance random_toy(std::mt19937_64& rng, std::size_t np, std::size_t n_u,
                              double rate_fraction) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    ToyInstance inst;
    OcpSpec& s = inst.spec;
    s.horizon_np = np;
    s.n_u = n_u;
    s.dt = 5.0;
    Vector gain(n_u), t_src(n_u), r(n_u), beta(n_u);
    for (std::size_t j = 0; j < n_u; ++j) {
        const double lo = 0.01 + 0.05 * uni(rng);
        const double hi = lo + 0.1 + 0.3 * uni(rng);
        s.u_min.push_back(lo);
        s.u_max.push_back(hi);
        const double width = rate_fraction * (hi - lo);
        s.du_min.push_back(-width * (0.5 + 0.5 * uni(rng)));
        s.du_max.push_back(width * (0.5 + 0.5 * uni(rng)));
        inst.u_prev.push_back(lo + (hi - lo) * uni(rng));
        gain[j] = 0.05 + 0.2 * uni(rng);
        t_src[j] = 30.0 + 30.0 * uni(rng);
        r[j] = 5.0 * uni(rng);
        beta[j] = 20.0 * uni(rng);
        inst.x0.push_back(-5.0 + 25.0 * uni(rng));
    }
    const double leak = 0.01 + 0.03 * uni(rng);
    const double t_amb = -7.0;
    const double t_set = 18.0 + 8.0 * uni(rng);
    const double dt = s.dt;
    s.dynamics = [=](const Vector& x, std::span<const double> u, std::size_t) {
        Vector out(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double rate = leak * (t_amb - x[j]) + gain[j] * u[j] * (t_src[j] - x[j]);
            out[j] = x[j] + dt * rate / (1.0 + dt * (leak + gain[j] * u[j]));
        }
        return out;
    };
    s.stage_cost = [=](const Vector& x, std::span<const double> u, std::span<const double> du,
                       std::size_t) {
        double c = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            c += (x[j] - t_set) * (x[j] - t_set) + r[j] * u[j] * u[j] + beta[j] * du[j] * du[j];
        }
        return c;
    };
    for (std::size_t j = 0; j < n_u; ++j) s.state_bounds.push_back({j, -50.0, t_set + 2.0});
    s.rho = 1e2;
    return inst;
}

struct GridResult {
    double cost = std::numeric_limits<double>::infinity();
    InputSequence best;
    std::size_t evaluated = 0;
};

/// Exhaustive search over `levels` evenly spaced values per input component,
/// keeping only sequences that satisfy the rate bounds exactly.
inline GridResult grid_search(const OcpSpec& spec, const Vector& x0,
                              std::span<const double> u_prev, int levels,
                              bool hold_after_first = false) {
    const std::size_t n_u = spec.n_u;
    const std::size_t np = spec.horizon_np;
    std::vector<Vector> grid(n_u);
    for (std::size_t j = 0; j < n_u; ++j) {
        for (int l = 0; l < levels; ++l) {
            grid[j].push_back(spec.u_min[j] +
                              (spec.u_max[j] - spec.u_min[j]) * l / (levels - 1));
        }
    }
    GridResult out;
    InputSequence seq(np, n_u);
    const std::size_t free_steps = hold_after_first ? 1 : np;
    const std::size_t dims = free_steps * n_u;
    std::function<void(std::size_t)> recurse = [&](std::size_t d) {
        if (d == dims) {
            if (hold_after_first) {
                for (std::size_t k = 1; k < np; ++k) {
                    for (std::size_t j = 0; j < n_u; ++j) seq(k, j) = seq(0, j);
                }
            }
            const double c = rollout_cost(spec, x0, u_prev, seq);
            ++out.evaluated;
            if (c < out.cost) {
                out.cost = c;
                out.best = seq;
            }
            return;
        }
        const std::size_t k = d / n_u, j = d % n_u;
        const double prev = k == 0 ? u_prev[j] : seq(k - 1, j);
        for (double v : grid[j]) {
            const double du = v - prev;
            if (du < spec.du_min[j] || du > spec.du_max[j]) continue;
            seq(k, j) = v;
            recurse(d + 1);
        }
    };
    recurse(0);
    return out;
}

}  // namespace itms::testing
