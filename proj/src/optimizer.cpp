#include "itms/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "itms/errors.hpp"

namespace itms {
namespace {

// Euclidean projection of one input channel onto its box and rate set by
// Dykstra's alternating projections over three convex sets: the box (with the
// first rate bound folded in), the even difference pairs and the odd pairs.
void project_channel_euclidean(std::vector<double>& v, double prev, double lo, double hi,
                               double dlo, double dhi) {
    const std::size_t n = v.size();
    const double first_lo = std::max(lo, prev + dlo);
    const double first_hi = std::min(hi, prev + dhi);
    auto project_box = [&](std::vector<double>& x) {
        x[0] = std::clamp(x[0], first_lo, first_hi);
        for (std::size_t k = 1; k < n; ++k) x[k] = std::clamp(x[k], lo, hi);
    };
    auto project_pairs = [&](std::vector<double>& x, std::size_t start) {
        for (std::size_t k = start; k + 1 < n; k += 2) {
            const double diff = x[k + 1] - x[k];
            if (diff > dhi) {
                const double e = 0.5 * (diff - dhi);
                x[k] += e;
                x[k + 1] -= e;
            } else if (diff < dlo) {
                const double e = 0.5 * (dlo - diff);
                x[k] -= e;
                x[k + 1] += e;
            }
        }
    };
    if (n == 1) {
        project_box(v);
        return;
    }
    std::vector<double> inc_a(n, 0.0), inc_b(n, 0.0), inc_c(n, 0.0), y(n), before(n);
    for (int it = 0; it < 500; ++it) {
        before = v;
        for (std::size_t k = 0; k < n; ++k) y[k] = v[k] + inc_a[k];
        project_box(y);
        for (std::size_t k = 0; k < n; ++k) inc_a[k] = v[k] + inc_a[k] - y[k], v[k] = y[k];
        for (std::size_t k = 0; k < n; ++k) y[k] = v[k] + inc_b[k];
        project_pairs(y, 0);
        for (std::size_t k = 0; k < n; ++k) inc_b[k] = v[k] + inc_b[k] - y[k], v[k] = y[k];
        for (std::size_t k = 0; k < n; ++k) y[k] = v[k] + inc_c[k];
        project_pairs(y, 1);
        for (std::size_t k = 0; k < n; ++k) inc_c[k] = v[k] + inc_c[k] - y[k], v[k] = y[k];
        double change = 0.0;
        for (std::size_t k = 0; k < n; ++k) change = std::max(change, std::abs(v[k] - before[k]));
        if (change <= 1e-14 * std::max(1.0, hi - lo)) break;
    }
}

InputSequence project_euclidean(const InputSequence& u_seq, std::span<const double> u_prev,
                                const OcpSpec& spec) {
    InputSequence out = u_seq;
    std::vector<double> channel(u_seq.horizon());
    for (std::size_t j = 0; j < spec.n_u; ++j) {
        for (std::size_t k = 0; k < channel.size(); ++k) channel[k] = u_seq(k, j);
        project_channel_euclidean(channel, u_prev[j], spec.u_min[j], spec.u_max[j],
                                  spec.du_min[j], spec.du_max[j]);
        for (std::size_t k = 0; k < channel.size(); ++k) out(k, j) = channel[k];
    }
    return out;
}

void check_dims(const OcpSpec& spec, std::span<const double> u_prev, const InputSequence& u_seq) {
    if (u_prev.size() != spec.n_u) {
        throw ArgumentError(
            fmt::format("u_prev has {} components, expected {}", u_prev.size(), spec.n_u));
    }
    if (u_seq.horizon() != spec.horizon_np || u_seq.inputs() != spec.n_u) {
        throw ArgumentError(fmt::format("input sequence is {}x{}, expected {}x{}",
                                        u_seq.horizon(), u_seq.inputs(), spec.horizon_np,
                                        spec.n_u));
    }
}

}  // namespace

InputSequence InputSequence::hold(std::size_t np, std::span<const double> u) {
    InputSequence s(np, u.size());
    for (std::size_t k = 0; k < np; ++k) {
        for (std::size_t j = 0; j < u.size(); ++j) s(k, j) = u[j];
    }
    return s;
}

InputSequence InputSequence::shifted() const {
    InputSequence s = *this;
    if (np_ < 2) return s;
    for (std::size_t k = 0; k + 1 < np_; ++k) {
        for (std::size_t j = 0; j < n_u_; ++j) s(k, j) = (*this)(k + 1, j);
    }
    return s;
}

void OcpSpec::validate() const {
    if (horizon_np < 1) throw ArgumentError("horizon must be at least one step");
    if (n_u < 1) throw ArgumentError("input dimension must be at least one");
    if (!dynamics || !stage_cost) throw ArgumentError("dynamics and stage cost must be set");
    if (u_min.size() != n_u || u_max.size() != n_u || du_min.size() != n_u ||
        du_max.size() != n_u) {
        throw ArgumentError("bound vectors must have n_u components");
    }
    for (std::size_t j = 0; j < n_u; ++j) {
        if (!(u_min[j] <= u_max[j])) {
            throw ArgumentError(fmt::format("u_min > u_max for input {}", j));
        }
        if (!(du_min[j] <= 0.0 && 0.0 <= du_max[j])) {
            throw ArgumentError(fmt::format("rate bounds of input {} must bracket zero", j));
        }
    }
    if (rho < 0.0) throw ArgumentError("soft-bound weight must be non-negative");
}

double rollout_cost(const OcpSpec& spec, const Vector& x0, std::span<const double> u_prev,
                    const InputSequence& u_seq) {
    check_dims(spec, u_prev, u_seq);
    Vector x = x0;
    Vector du(spec.n_u);
    double cost = 0.0;
    for (std::size_t k = 0; k < spec.horizon_np; ++k) {
        const auto u = u_seq.row(k);
        for (std::size_t j = 0; j < spec.n_u; ++j) {
            du[j] = u[j] - (k == 0 ? u_prev[j] : u_seq(k - 1, j));
        }
        x = spec.dynamics(x, u, k);
        cost += spec.stage_cost(x, u, du, k + 1);
        for (const auto& b : spec.state_bounds) {
            const double v = x[b.index];
            const double viol = std::max({b.lower - v, 0.0, v - b.upper});
            cost += spec.rho * viol * viol;
        }
        if (!std::isfinite(cost)) {
            throw NumericalBlowupError(k + 1,
                                       fmt::format("rollout cost non-finite at step {}", k + 1));
        }
    }
    return cost;
}

std::pair<double, double> rate_window(double prev, double lo, double hi, double du_min,
                                      double du_max) {
    double a = std::max(lo, prev + du_min);
    double b = std::min(hi, prev + du_max);
    while (a - prev < du_min) a = std::nextafter(a, INFINITY);
    while (b - prev > du_max) b = std::nextafter(b, -INFINITY);
    return {a, b};
}

InputSequence project_rate_box(const InputSequence& u_seq, std::span<const double> u_prev,
                               const OcpSpec& spec) {
    check_dims(spec, u_prev, u_seq);
    InputSequence out = u_seq;
    for (std::size_t j = 0; j < spec.n_u; ++j) {
        double prev = u_prev[j];
        for (std::size_t k = 0; k < spec.horizon_np; ++k) {
            const auto [lo, hi] =
                rate_window(prev, spec.u_min[j], spec.u_max[j], spec.du_min[j], spec.du_max[j]);
            if (lo > hi) {
                throw InfeasibleError(fmt::format(
                    "input {} at step {}: box [{}, {}] and rate window [{}, {}] do not intersect",
                    j, k, spec.u_min[j], spec.u_max[j], prev + spec.du_min[j],
                    prev + spec.du_max[j]));
            }
            out(k, j) = std::clamp(out(k, j), lo, hi);
            prev = out(k, j);
        }
    }
    return out;
}

Vector finite_diff_grad(const OcpSpec& spec, const Vector& x0, std::span<const double> u_prev,
                        const InputSequence& u_seq, std::span<const double> h) {
    check_dims(spec, u_prev, u_seq);
    Vector grad(spec.horizon_np * spec.n_u, 0.0);
    InputSequence probe = u_seq;
    for (std::size_t k = 0; k < spec.horizon_np; ++k) {
        for (std::size_t j = 0; j < spec.n_u; ++j) {
            const double base = u_seq(k, j);
            probe(k, j) = base + h[j];
            const double up = rollout_cost(spec, x0, u_prev, probe);
            probe(k, j) = base - h[j];
            const double down = rollout_cost(spec, x0, u_prev, probe);
            probe(k, j) = base;
            grad[k * spec.n_u + j] = (up - down) / (2.0 * h[j]);
        }
    }
    return grad;
}

Vector finite_diff_grad(const OcpSpec& spec, const Vector& x0, std::span<const double> u_prev,
                        const InputSequence& u_seq, double h) {
    if (!(h > 0.0)) throw ArgumentError("finite-difference step must be positive");
    const Vector hv(spec.n_u, h);
    return finite_diff_grad(spec, x0, u_prev, u_seq, hv);
}

SolveResult solve(const OcpSpec& spec, const Vector& x0, std::span<const double> u_prev,
                  const std::optional<InputSequence>& warm_start, const SolverOptions& options) {
    spec.validate();
    if (warm_start) check_dims(spec, u_prev, *warm_start);

    const std::size_t n_u = spec.n_u;
    Vector range(n_u), h(n_u);
    for (std::size_t j = 0; j < n_u; ++j) {
        range[j] = std::max(spec.u_max[j] - spec.u_min[j], 1e-12);
        h[j] = options.fd_step * range[j];
    }

    InputSequence u = project_rate_box(
        warm_start ? *warm_start : InputSequence::hold(spec.horizon_np, u_prev), u_prev, spec);
    double cost = rollout_cost(spec, x0, u_prev, u);

    SolveResult result{u, cost, 0, false};
    // Step length in range-normalised coordinates; reset from the first gradient.
    double step = -1.0;

    for (int it = 0; it < options.max_iterations; ++it) {
        result.iterations = it + 1;
        const Vector g = finite_diff_grad(spec, x0, u_prev, u, h);

        double g_scaled_max = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            g_scaled_max = std::max(g_scaled_max, std::abs(g[i] * range[i % n_u]));
        }
        if (g_scaled_max == 0.0) {
            result.converged = true;
            break;
        }
        if (step < 0.0) step = 0.25 / g_scaled_max;

        bool accepted = false;
        InputSequence trial;
        double trial_cost = cost;
        for (int ls = 0; ls < 40; ++ls) {
            trial = u;
            auto flat = trial.flat();
            for (std::size_t i = 0; i < flat.size(); ++i) {
                const double r = range[i % n_u];
                flat[i] -= step * g[i] * r * r;
            }
            trial = project_rate_box(project_euclidean(trial, u_prev, spec), u_prev, spec);
            double decrease = 0.0;
            const auto tf = trial.flat();
            const auto uf = u.flat();
            for (std::size_t i = 0; i < tf.size(); ++i) decrease += g[i] * (uf[i] - tf[i]);
            trial_cost = rollout_cost(spec, x0, u_prev, trial);
            if (decrease > 0.0 && trial_cost <= cost - 1e-4 * decrease) {
                accepted = true;
                break;
            }
            if (decrease <= 0.0 && trial == u) break;  // projected step vanished
            step *= 0.5;
        }
        if (!accepted) {
            result.converged = true;
            break;
        }
        const double improvement = cost - trial_cost;
        u = std::move(trial);
        cost = trial_cost;
        if (cost < result.cost) {
            result.u_seq = u;
            result.cost = cost;
        }
        step *= 2.0;
        if (improvement <= options.tolerance * std::max(std::abs(cost), 1e-12)) {
            result.converged = true;
            break;
        }
    }
    return result;
}

}  // namespace itms
