#pragma once

// Finite-horizon optimal control by direct single shooting. Inputs are
// piecewise constant over the horizon and subject to box and rate bounds;
// state bounds are enforced as quadratic penalties.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace itms {

using Vector = std::vector<double>;

/// Np x n_u input trajectory, row k is the input applied over step k.
class InputSequence {
public:
    InputSequence() = default;
    InputSequence(std::size_t np, std::size_t n_u, double fill = 0.0)
        : np_(np), n_u_(n_u), data_(np * n_u, fill) {}

    /// Every row equal to `u`.
    [[nodiscard]] static InputSequence hold(std::size_t np, std::span<const double> u);

    [[nodiscard]] std::size_t horizon() const noexcept { return np_; }
    [[nodiscard]] std::size_t inputs() const noexcept { return n_u_; }

    double& operator()(std::size_t k, std::size_t j) { return data_[k * n_u_ + j]; }
    double operator()(std::size_t k, std::size_t j) const { return data_[k * n_u_ + j]; }

    [[nodiscard]] std::span<const double> row(std::size_t k) const {
        return {data_.data() + k * n_u_, n_u_};
    }
    [[nodiscard]] std::span<double> flat() { return data_; }
    [[nodiscard]] std::span<const double> flat() const { return data_; }

    /// Drop the first row and repeat the last one.
    [[nodiscard]] InputSequence shifted() const;

    friend bool operator==(const InputSequence&, const InputSequence&) = default;

private:
    std::size_t np_ = 0;
    std::size_t n_u_ = 0;
    std::vector<double> data_;
};

/// Soft bound on one state component, penalised by rho * violation^2.
struct SoftBound {
    std::size_t index = 0;
    double lower = 0.0;
    double upper = 0.0;
};

struct OcpSpec {
    /// x(k+1) = f(x(k), u(k), k), k = 0..Np-1.
    using Dynamics =
        std::function<Vector(const Vector& x, std::span<const double> u, std::size_t k)>;
    /// Stage cost at predicted state x(k), k = 1..Np, with input u(k-1) and
    /// du = u(k-1) - u(k-2) (u(-1) is the previously applied input).
    using StageCost = std::function<double(const Vector& x, std::span<const double> u,
                                           std::span<const double> du, std::size_t k)>;

    std::size_t horizon_np = 1;
    double dt = 1.0;
    std::size_t n_u = 1;
    Dynamics dynamics;
    StageCost stage_cost;
    Vector u_min, u_max;
    Vector du_min, du_max;
    std::vector<SoftBound> state_bounds;
    double rho = 1e3;

    /// Throws ArgumentError on inconsistent dimensions or bounds.
    void validate() const;
};

struct SolverOptions {
    int max_iterations = 200;
    /// Finite-difference perturbation as a fraction of each input's range.
    double fd_step = 1e-4;
    /// Relative cost decrease below which the iteration stops.
    double tolerance = 1e-10;
};

struct SolveResult {
    InputSequence u_seq;
    double cost = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Simulate from x0 and accumulate stage costs plus soft-bound penalties.
/// Throws NumericalBlowupError when the running cost becomes non-finite.
[[nodiscard]] double rollout_cost(const OcpSpec& spec, const Vector& x0,
                                  std::span<const double> u_prev, const InputSequence& u_seq);

/// Values v in [lo, hi] whose computed difference v - prev lies in
/// [du_min, du_max]. Empty when first > second.
[[nodiscard]] std::pair<double, double> rate_window(double prev, double lo, double hi,
                                                    double du_min, double du_max);

/// Sequential clamp of u(k) into [u(k-1) + du_min, u(k-1) + du_max] and the
/// box, k = 0..Np-1. Throws InfeasibleError when the intersection is empty.
[[nodiscard]] InputSequence project_rate_box(const InputSequence& u_seq,
                                             std::span<const double> u_prev, const OcpSpec& spec);

/// Central-difference gradient of rollout_cost, one perturbation per input
/// component (broadcast over the horizon).
[[nodiscard]] Vector finite_diff_grad(const OcpSpec& spec, const Vector& x0,
                                      std::span<const double> u_prev, const InputSequence& u_seq,
                                      std::span<const double> h);
[[nodiscard]] Vector finite_diff_grad(const OcpSpec& spec, const Vector& x0,
                                      std::span<const double> u_prev, const InputSequence& u_seq,
                                      double h);

/// Projected gradient descent with backtracking. Starts from the projected
/// warm start (or u_prev held over the horizon) and returns the best
/// feasible iterate; never returns a cost above the starting cost.
[[nodiscard]] SolveResult solve(const OcpSpec& spec, const Vector& x0,
                                std::span<const double> u_prev,
                                const std::optional<InputSequence>& warm_start = std::nullopt,
                                const SolverOptions& options = {});

}  // namespace itms
