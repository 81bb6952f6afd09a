#include "siqr/ode.hpp"

#include "siqr/errors.hpp"

#include <cmath>
#include <string>

namespace siqr::ode {

namespace {

void check_finite_stage(std::span<const double> dxdt, double t) {
    for (double d : dxdt) {
        if (!std::isfinite(d)) {
            throw NumericError("non-finite derivative at t = " + std::to_string(t));
        }
    }
}

struct Rk4Scratch {
    std::vector<double> k1, k2, k3, k4, tmp;
    explicit Rk4Scratch(size_t n) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}
};

void rk4_step_inplace(const RhsFn& rhs, double t, std::span<double> x, double h,
                      Rk4Scratch& s) {
    const size_t n = x.size();
    rhs(t, x, s.k1);
    check_finite_stage(s.k1, t);
    for (size_t i = 0; i < n; ++i) {
        s.tmp[i] = x[i] + 0.5 * h * s.k1[i];
    }
    rhs(t + 0.5 * h, s.tmp, s.k2);
    check_finite_stage(s.k2, t + 0.5 * h);
    for (size_t i = 0; i < n; ++i) {
        s.tmp[i] = x[i] + 0.5 * h * s.k2[i];
    }
    rhs(t + 0.5 * h, s.tmp, s.k3);
    check_finite_stage(s.k3, t + 0.5 * h);
    for (size_t i = 0; i < n; ++i) {
        s.tmp[i] = x[i] + h * s.k3[i];
    }
    rhs(t + h, s.tmp, s.k4);
    check_finite_stage(s.k4, t + h);
    for (size_t i = 0; i < n; ++i) {
        x[i] += (h / 6.0) * (s.k1[i] + 2.0 * s.k2[i] + 2.0 * s.k3[i] + s.k4[i]);
    }
}

void validate_problem(const OdeProblem& prob) {
    if (prob.dim <= 0) {
        throw ValidationError("dim", "state dimension must be positive");
    }
    if (!prob.rhs) {
        throw ValidationError("rhs", "missing derivative function");
    }
    if (!(prob.step > 0.0)) {
        throw ValidationError("step", "step must be strictly positive");
    }
    if (prob.t_end == prob.t0 || !std::isfinite(prob.t0) || !std::isfinite(prob.t_end)) {
        throw ValidationError("t_end", "t_end must be finite and distinct from t0");
    }
    if (prob.initial.size() != static_cast<size_t>(prob.dim)) {
        throw ValidationError("initial", "initial state length does not match dim");
    }
    for (double x : prob.initial) {
        if (!std::isfinite(x)) {
            throw ValidationError("initial", "initial state must be finite");
        }
    }
}

} // namespace

void Trajectory::append(double t, std::span<const double> x) {
    if (x.size() != static_cast<size_t>(dim_)) {
        throw ShapeError("trajectory sample length " + std::to_string(x.size()) +
                         " does not match dim " + std::to_string(dim_));
    }
    times_.push_back(t);
    states_.insert(states_.end(), x.begin(), x.end());
}

void Trajectory::attach_controls(int control_dim, std::vector<double> flat) {
    if (control_dim <= 0 ||
        flat.size() != times_.size() * static_cast<size_t>(control_dim)) {
        throw ShapeError("control sequence does not align with trajectory samples");
    }
    control_dim_ = control_dim;
    controls_ = std::move(flat);
}

std::vector<double> rk4_step(const RhsFn& rhs, double t, std::span<const double> x, double h) {
    if (h == 0.0) {
        throw ValidationError("h", "step must be nonzero");
    }
    std::vector<double> out(x.begin(), x.end());
    Rk4Scratch scratch(out.size());
    rk4_step_inplace(rhs, t, out, h, scratch);
    return out;
}

Trajectory integrate(const OdeProblem& prob) {
    validate_problem(prob);

    const double direction = prob.t_end > prob.t0 ? 1.0 : -1.0;
    const double h = direction * prob.step;
    const double span = std::abs(prob.t_end - prob.t0);
    long n_steps = static_cast<long>(std::ceil(span / prob.step - 1e-9));
    if (n_steps < 1) {
        n_steps = 1;
    }

    Trajectory traj(prob.dim);
    std::vector<double> x = prob.initial;
    traj.append(prob.t0, x);

    Rk4Scratch scratch(x.size());
    double t_prev = prob.t0;
    for (long i = 1; i <= n_steps; ++i) {
        const double t_next = (i == n_steps) ? prob.t_end : prob.t0 + static_cast<double>(i) * h;
        rk4_step_inplace(prob.rhs, t_prev, x, t_next - t_prev, scratch);
        traj.append(t_next, x);
        t_prev = t_next;
    }
    return traj;
}

Trajectory integrate_matrix(const OdeProblem& prob, int n) {
    if (prob.dim != n * n) {
        throw ShapeError("matrix problem dim " + std::to_string(prob.dim) +
                         " is not " + std::to_string(n) + "x" + std::to_string(n));
    }
    return integrate(prob);
}

std::optional<double> detect_steady_state(const Trajectory& traj, const RhsFn& rhs, double tol,
                                          int window) {
    if (window < 1) {
        throw ValidationError("window", "window must be at least 1");
    }
    const size_t n = traj.size();
    std::vector<double> dxdt(static_cast<size_t>(traj.dim()));
    size_t run_start = 0;
    size_t run_len = 0;
    for (size_t k = 0; k < n; ++k) {
        rhs(traj.time(k), traj.state(k), dxdt);
        double inf_norm = 0.0;
        for (double d : dxdt) {
            inf_norm = std::max(inf_norm, std::abs(d));
        }
        if (inf_norm <= tol) {
            if (run_len == 0) {
                run_start = k;
            }
            ++run_len;
            if (run_len >= static_cast<size_t>(window)) {
                return traj.time(run_start);
            }
        } else {
            run_len = 0;
        }
    }
    return std::nullopt;
}

} // namespace siqr::ode
