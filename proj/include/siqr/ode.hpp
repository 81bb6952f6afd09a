#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace siqr::ode {

// Derivative evaluation: writes d/dt of the state into dxdt.
using RhsFn = std::function<void(double t, std::span<const double> x, std::span<double> dxdt)>;

struct OdeProblem {
    int dim = 0;
    RhsFn rhs;
    double t0 = 0.0;
    double t_end = 0.0;
    double step = 0.0;  // magnitude; direction follows sign of t_end - t0
    std::vector<double> initial;
};

// Uniformly sampled solution (the final step is shortened to land exactly on
// t_end). Controls, when attached, hold one control vector per sample.
class Trajectory {
public:
    explicit Trajectory(int dim) : dim_(dim) {}

    void append(double t, std::span<const double> x);

    size_t size() const noexcept { return times_.size(); }
    int dim() const noexcept { return dim_; }
    double time(size_t k) const { return times_[k]; }
    std::span<const double> state(size_t k) const {
        return {states_.data() + k * static_cast<size_t>(dim_), static_cast<size_t>(dim_)};
    }
    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<double>& flat_states() const noexcept { return states_; }

    bool has_controls() const noexcept { return control_dim_ > 0; }
    int control_dim() const noexcept { return control_dim_; }
    std::span<const double> control(size_t k) const {
        return {controls_.data() + k * static_cast<size_t>(control_dim_),
                static_cast<size_t>(control_dim_)};
    }
    void attach_controls(int control_dim, std::vector<double> flat);

private:
    int dim_;
    int control_dim_ = 0;
    std::vector<double> times_;
    std::vector<double> states_;
    std::vector<double> controls_;
};

// One classical four-stage Runge-Kutta step from (t, x) with step h; h < 0
// steps backward. Throws NumericError when a stage produces a non-finite
// derivative.
std::vector<double> rk4_step(const RhsFn& rhs, double t, std::span<const double> x, double h);

Trajectory integrate(const OdeProblem& prob);

// Same integrator over an n x n matrix state flattened row-major.
Trajectory integrate_matrix(const OdeProblem& prob, int n);

// Earliest sample time from which the sup norm of the derivative stays at or
// below tol for `window` consecutive samples; absent if that never happens.
std::optional<double> detect_steady_state(const Trajectory& traj, const RhsFn& rhs, double tol,
                                          int window);

} // namespace siqr::ode
