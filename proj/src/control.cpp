#include "siqr/control.hpp"

#include "siqr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace siqr::control {

namespace {

using linalg::Matrix;

void require_shape(const Matrix& m, int rows, int cols, const char* what) {
    if (m.rows() != rows || m.cols() != cols) {
        throw ShapeError(std::string(what) + " must be " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", got " + m.shape_string());
    }
}

double symmetry_tol(const Matrix& m) {
    return 1e-9 * (1.0 + linalg::max_abs(m));
}

// 2x2 inverse by the adjugate formula.
Matrix inverse_2x2(const Matrix& m) {
    require_shape(m, 2, 2, "matrix");
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    if (std::abs(det) < 1e-300) {
        throw NumericError("R weight matrix is singular");
    }
    Matrix inv(2, 2);
    inv(0, 0) = m(1, 1) / det;
    inv(0, 1) = -m(0, 1) / det;
    inv(1, 0) = -m(1, 0) / det;
    inv(1, 1) = m(0, 0) / det;
    return inv;
}

double are_residual(const LinearSystem& sys, const Matrix& br_inv_bt, const Matrix& g,
                    const Matrix& p) {
    const Matrix at = linalg::transpose(sys.a);
    const Matrix term = at * p + p * sys.a - p * br_inv_bt * p + g;
    return linalg::frobenius_norm(term);
}

// Nearest index into a strictly monotone (ascending or descending) grid;
// ties resolve toward the smaller time value.
size_t nearest_grid_index(const std::vector<double>& times, double t) {
    const bool ascending = times.back() >= times.front();
    size_t lo = 0;
    size_t hi = times.size() - 1;
    while (hi - lo > 1) {
        const size_t mid = (lo + hi) / 2;
        const bool go_right = ascending ? times[mid] <= t : times[mid] >= t;
        if (go_right) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double d_lo = std::abs(times[lo] - t);
    const double d_hi = std::abs(times[hi] - t);
    if (d_lo < d_hi) {
        return lo;
    }
    if (d_hi < d_lo) {
        return hi;
    }
    return times[lo] <= times[hi] ? lo : hi;
}

ode::RhsFn make_model_rhs(const ModelParams& p) {
    return [p](double, std::span<const double> x, std::span<double> dxdt) {
        const StateVec d = rhs(p, StateVec{x[0], x[1], x[2], x[3]});
        dxdt[0] = d.s;
        dxdt[1] = d.i;
        dxdt[2] = d.q;
        dxdt[3] = d.r;
    };
}

} // namespace

void validate_weights(const LqrWeights& w) {
    require_shape(w.g, 4, 4, "G weight matrix");
    require_shape(w.r, 2, 2, "R weight matrix");
    if (!linalg::is_symmetric(w.g, 1e-12 * (1.0 + linalg::max_abs(w.g)))) {
        throw ValidationError("g", "G weight matrix must be symmetric");
    }
    if (!linalg::is_symmetric(w.r, 1e-12 * (1.0 + linalg::max_abs(w.r)))) {
        throw ValidationError("r", "R weight matrix must be symmetric");
    }
    // Symmetric 2x2 is positive definite iff trace and determinant are positive.
    const double det_r = w.r(0, 0) * w.r(1, 1) - w.r(0, 1) * w.r(1, 0);
    if (!(det_r > 0.0) || !(w.r(0, 0) + w.r(1, 1) > 0.0)) {
        throw ValidationError("r", "R weight matrix must be positive definite");
    }
    // Symmetric matrices have a real spectrum, so G is positive semidefinite
    // iff the characteristic coefficients alternate in sign; this stays exact
    // for repeated zero eigenvalues where root clusters would not.
    const linalg::Polynomial cp = linalg::char_poly(w.g);
    double coeff_scale = 0.0;
    for (double c : cp.coeffs) {
        coeff_scale = std::max(coeff_scale, std::abs(c));
    }
    for (size_t k = 1; k < cp.coeffs.size(); ++k) {
        const double signed_coeff = (k % 2 == 0 ? 1.0 : -1.0) * cp.coeffs[k];
        if (signed_coeff < -1e-12 * (1.0 + coeff_scale)) {
            throw ValidationError("g", "G weight matrix must be positive semidefinite");
        }
    }
}

LqrWeights reference_weights() {
    LqrWeights w;
    w.g = Matrix::diagonal({1.0, 1.0, 0.0, 0.0});
    w.r = 2.0 * Matrix::identity(2);
    return w;
}

LinearSystem build_system(const ModelParams& p) {
    Matrix a(4, 4);
    a(0, 0) = -p.mu;
    a(1, 1) = -p.removal_rate();
    a(2, 1) = p.eta - p.epsilon;
    a(2, 2) = -(p.rho + p.mu);
    a(3, 1) = p.gamma;
    a(3, 2) = p.rho;
    a(3, 3) = -p.mu;
    return LinearSystem{a, canonical_input_matrix()};
}

linalg::Matrix canonical_input_matrix() {
    Matrix b(4, 2);
    b(0, 0) = 1.0;
    b(1, 1) = 1.0;
    return b;
}

linalg::Matrix controllability_matrix(const LinearSystem& sys) {
    require_shape(sys.a, 4, 4, "A");
    require_shape(sys.b, 4, 2, "B");
    const Matrix ab = sys.a * sys.b;
    const Matrix a2b = sys.a * ab;
    const Matrix a3b = sys.a * a2b;
    return linalg::horzcat({sys.b, ab, a2b, a3b});
}

bool is_controllable(const LinearSystem& sys, double tol) {
    return linalg::rank(controllability_matrix(sys), tol) == 4;
}

FeedbackGain vaccination_feedback(const ModelParams& p) {
    const double coupling = p.alpha * p.delta / (p.mu + p.v);
    Matrix f(2, 4);
    f(0, 0) = -p.v;
    f(0, 1) = -coupling;
    f(1, 1) = coupling;
    return FeedbackGain{f};
}

linalg::Matrix closed_loop(const LinearSystem& sys, const FeedbackGain& f) {
    require_shape(f.f, sys.b.cols(), sys.a.cols(), "feedback gain");
    return sys.a + sys.b * f.f;
}

RiccatiSolution dre_integrate(const LinearSystem& sys, const LqrWeights& w, double horizon,
                              double step, DreMode mode, const linalg::Matrix& boundary) {
    require_shape(sys.a, 4, 4, "A");
    require_shape(sys.b, 4, 2, "B");
    validate_weights(w);
    if (!(step > 0.0)) {
        throw ValidationError("step", "Riccati step must be strictly positive");
    }
    if (!(horizon > 0.0)) {
        throw ValidationError("horizon", "Riccati horizon must be strictly positive");
    }
    require_shape(boundary, 4, 4, "Riccati boundary matrix");
    if (!linalg::is_symmetric(boundary, symmetry_tol(boundary))) {
        throw NumericError("Riccati boundary matrix is not symmetric");
    }

    const Matrix at = linalg::transpose(sys.a);
    const Matrix br_inv_bt = sys.b * inverse_2x2(w.r) * linalg::transpose(sys.b);

    // Value-function form: dP/dtau = A'P + PA - P (B R^-1 B') P + G.
    const auto value_rhs = [&](double, std::span<const double> x, std::span<double> dxdt) {
        const Matrix p(4, 4, std::vector<double>(x.begin(), x.end()));
        const Matrix d = at * p + p * sys.a - p * br_inv_bt * p + w.g;
        std::copy(d.entries().begin(), d.entries().end(), dxdt.begin());
    };
    // Printed form: dP/dt = -A'P - PA + P (B R^-1 B') P - G.
    const auto printed_rhs = [&](double, std::span<const double> x, std::span<double> dxdt) {
        const Matrix p(4, 4, std::vector<double>(x.begin(), x.end()));
        const Matrix d = -1.0 * (at * p) - p * sys.a + p * br_inv_bt * p - w.g;
        std::copy(d.entries().begin(), d.entries().end(), dxdt.begin());
    };

    ode::OdeProblem prob;
    prob.dim = 16;
    prob.step = step;
    prob.initial.assign(boundary.entries().begin(), boundary.entries().end());
    if (mode == DreMode::ForwardFromInitial) {
        prob.rhs = value_rhs;
        prob.t0 = 0.0;
        prob.t_end = horizon;
    } else {
        prob.rhs = printed_rhs;
        prob.t0 = horizon;
        prob.t_end = 0.0;
    }

    const ode::Trajectory traj = ode::integrate_matrix(prob, 4);

    RiccatiSolution sol;
    sol.times = traj.times();
    sol.p_matrices.reserve(traj.size());
    for (size_t k = 0; k < traj.size(); ++k) {
        const auto x = traj.state(k);
        sol.p_matrices.push_back(
            linalg::symmetrize(Matrix(4, 4, std::vector<double>(x.begin(), x.end()))));
    }

    const size_t n = sol.p_matrices.size();
    sol.converged =
        n >= 2 && linalg::frobenius_norm(sol.p_matrices[n - 1] - sol.p_matrices[n - 2]) <= 1e-6;
    sol.final_are_residual = are_residual(sys, br_inv_bt, w.g, sol.p_matrices.back());
    return sol;
}

linalg::Matrix lqr_gain(const LinearSystem& sys, const LqrWeights& w,
                        const linalg::Matrix& p_matrix) {
    require_shape(p_matrix, 4, 4, "P");
    if (!linalg::is_symmetric(p_matrix, symmetry_tol(p_matrix))) {
        throw NumericError("P matrix is not symmetric");
    }
    validate_weights(w);
    return inverse_2x2(w.r) * linalg::transpose(sys.b) * p_matrix;
}

std::array<double, 2> costate_control(double lambda0, const LqrWeights& w) {
    validate_weights(w);
    const Matrix bt = linalg::transpose(canonical_input_matrix());
    Matrix ones(4, 1);
    for (int i = 0; i < 4; ++i) {
        ones(i, 0) = lambda0;
    }
    const Matrix u = -1.0 * (inverse_2x2(w.r) * (bt * ones));
    return {u(0, 0), u(1, 0)};
}

ode::Trajectory simulate_controlled(const ModelParams& p, const Controller& controller,
                                    const StateVec& initial, double horizon, double step) {
    if (!(horizon > 0.0)) {
        throw ValidationError("horizon", "horizon must be strictly positive");
    }

    ode::OdeProblem prob;
    prob.dim = 4;
    prob.t0 = 0.0;
    prob.t_end = horizon;
    prob.step = step;
    prob.initial = {initial.s, initial.i, initial.q, initial.r};

    // u at (t, x) per the active controller; the two channels add to dS/dt
    // and dI/dt, matching the column structure of B.
    std::function<std::array<double, 2>(double, std::span<const double>)> control_at;

    if (std::holds_alternative<NoControl>(controller)) {
        prob.rhs = make_model_rhs(p);
        control_at = [](double, std::span<const double>) {
            return std::array<double, 2>{0.0, 0.0};
        };
    } else if (const auto* costate = std::get_if<ConstantCostate>(&controller)) {
        const std::array<double, 2> u = costate_control(costate->lambda0, reference_weights());
        control_at = [u](double, std::span<const double>) { return u; };
        const ode::RhsFn base = make_model_rhs(p);
        prob.rhs = [base, u](double t, std::span<const double> x, std::span<double> dxdt) {
            base(t, x, dxdt);
            dxdt[0] += u[0];
            dxdt[1] += u[1];
        };
    } else {
        const auto& lqr = std::get<LqrTimeVarying>(controller);
        if (lqr.riccati == nullptr || lqr.weights == nullptr) {
            throw ValidationError("controller", "LQR controller needs a Riccati solution and weights");
        }
        const RiccatiSolution& sol = *lqr.riccati;
        if (sol.times.size() < 2) {
            throw GridCoverageError(horizon, "Riccati grid has fewer than two samples");
        }
        const double lo = std::min(sol.times.front(), sol.times.back());
        const double hi = std::max(sol.times.front(), sol.times.back());
        if (lo > 0.5 * step || hi < horizon - 0.5 * step) {
            throw GridCoverageError(horizon, "Riccati grid [" + std::to_string(lo) + ", " +
                                                 std::to_string(hi) +
                                                 "] does not cover the simulation horizon " +
                                                 std::to_string(horizon));
        }
        validate_weights(*lqr.weights);
        // Precompute R^-1 B' once; u(t, x) = -(R^-1 B') P(t) x.
        const Matrix rinv_bt =
            inverse_2x2(lqr.weights->r) * linalg::transpose(canonical_input_matrix());
        const RiccatiSolution* grid = lqr.riccati;
        control_at = [grid, rinv_bt](double t, std::span<const double> x) {
            const Matrix& pm = grid->p_matrices[nearest_grid_index(grid->times, t)];
            std::array<double, 4> px{};
            for (int r = 0; r < 4; ++r) {
                double acc = 0.0;
                for (int c = 0; c < 4; ++c) {
                    acc += pm(r, c) * x[static_cast<size_t>(c)];
                }
                px[static_cast<size_t>(r)] = acc;
            }
            std::array<double, 2> u{};
            for (int r = 0; r < 2; ++r) {
                double acc = 0.0;
                for (int c = 0; c < 4; ++c) {
                    acc += rinv_bt(r, c) * px[static_cast<size_t>(c)];
                }
                u[static_cast<size_t>(r)] = -acc;
            }
            return u;
        };
        const ode::RhsFn base = make_model_rhs(p);
        prob.rhs = [base, control_at](double t, std::span<const double> x,
                                      std::span<double> dxdt) {
            base(t, x, dxdt);
            const std::array<double, 2> u = control_at(t, x);
            dxdt[0] += u[0];
            dxdt[1] += u[1];
        };
    }

    ode::Trajectory traj = ode::integrate(prob);

    std::vector<double> controls;
    controls.reserve(traj.size() * 2);
    for (size_t k = 0; k < traj.size(); ++k) {
        const std::array<double, 2> u = control_at(traj.time(k), traj.state(k));
        controls.push_back(u[0]);
        controls.push_back(u[1]);
    }
    traj.attach_controls(2, std::move(controls));
    return traj;
}

std::vector<double> cumulative_cost(const ode::Trajectory& traj, const LqrWeights& w) {
    if (traj.size() == 0) {
        throw ShapeError("cost of an empty trajectory is undefined");
    }
    if (!traj.has_controls()) {
        throw NumericError("trajectory carries no controls; cost is undefined");
    }
    validate_weights(w);
    if (traj.dim() != 4 || traj.control_dim() != 2) {
        throw ShapeError("cost expects 4 states and 2 controls per sample");
    }

    const auto integrand = [&](size_t k) {
        const auto x = traj.state(k);
        const auto u = traj.control(k);
        double xgx = 0.0;
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
                xgx += x[static_cast<size_t>(r)] * w.g(r, c) * x[static_cast<size_t>(c)];
            }
        }
        double uru = 0.0;
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                uru += u[static_cast<size_t>(r)] * w.r(r, c) * u[static_cast<size_t>(c)];
            }
        }
        return 0.5 * (xgx + uru);
    };

    std::vector<double> cumulative(traj.size(), 0.0);
    if (traj.size() < 2) {
        return cumulative;
    }
    double previous = integrand(0);
    double acc = 0.0;
    for (size_t k = 1; k < traj.size(); ++k) {
        const double current = integrand(k);
        acc += 0.5 * (previous + current) * (traj.time(k) - traj.time(k - 1));
        cumulative[k] = acc;
        previous = current;
    }
    return cumulative;
}

double evaluate_cost(const ode::Trajectory& traj, const LqrWeights& w) {
    return cumulative_cost(traj, w).back();
}

} // namespace siqr::control
