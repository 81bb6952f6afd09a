#pragma once

#include "siqr/linalg.hpp"
#include "siqr/model.hpp"
#include "siqr/ode.hpp"

#include <array>
#include <variant>
#include <vector>

namespace siqr::control {

// x' = A x + B u with A 4x4 and B 4x2. The control channels feed the S and I
// compartments (B columns are the first two unit vectors).
struct LinearSystem {
    linalg::Matrix a;
    linalg::Matrix b;
};

// State feedback applied as x' = (A + B F) x.
struct FeedbackGain {
    linalg::Matrix f;  // 2x4
};

// Quadratic cost weights: G positive semidefinite 4x4, R positive definite
// 2x2. validate_weights enforces both.
struct LqrWeights {
    linalg::Matrix g;
    linalg::Matrix r;
};

void validate_weights(const LqrWeights& w);

// The weight matrices used throughout the cost studies:
// G = diag(1, 1, 0, 0), R = 2 * I, so the integrand is (S^2 + I^2 + u'u) / 2.
LqrWeights reference_weights();

struct RiccatiSolution {
    std::vector<double> times;
    std::vector<linalg::Matrix> p_matrices;  // one symmetric 4x4 per time
    bool converged = false;
    double final_are_residual = 0.0;
};

// Boundary handling for the differential Riccati equation
//   dP/dt = -A'P - PA + P B R^-1 B' P - G.
// ForwardFromInitial treats the boundary as the value at time-to-go zero and
// sweeps the equivalent initial-value form dP/dtau = A'P + PA - P B R^-1 B' P + G
// forward, which is how the equation is solved numerically in practice; its
// grid ascends 0..horizon. BackwardFromTerminal integrates the equation above
// backward from t = horizon with P(horizon) given; its grid descends
// horizon..0. Both converge to the stabilizing algebraic solution on long
// horizons.
enum class DreMode { ForwardFromInitial, BackwardFromTerminal };

// Fixed A and B of the linearized control studies:
//   A = [-mu 0 0 0; 0 -(g+mu+eta) 0 0; 0 eta-eps -(rho+mu) 0; 0 gamma rho -mu]
//   B = [1 0; 0 1; 0 0; 0 0]
LinearSystem build_system(const ModelParams& p);

linalg::Matrix canonical_input_matrix();  // the 4x2 B above

// [B | AB | A^2 B | A^3 B], 4x8.
linalg::Matrix controllability_matrix(const LinearSystem& sys);

// Kalman rank condition: rank of the controllability matrix equals 4.
bool is_controllable(const LinearSystem& sys, double tol = 1e-10);

// The vaccination gain -[v, a*d/(mu+v), 0, 0; 0, -a*d/(mu+v), 0, 0]; composing
// it through closed_loop reproduces the Jacobian of the vaccinated model at
// the disease-free point.
FeedbackGain vaccination_feedback(const ModelParams& p);

// A + B F.
linalg::Matrix closed_loop(const LinearSystem& sys, const FeedbackGain& f);

RiccatiSolution dre_integrate(const LinearSystem& sys, const LqrWeights& w, double horizon,
                              double step, DreMode mode, const linalg::Matrix& boundary);

// K = R^-1 B' P; the control law is u(t) = -K x(t).
linalg::Matrix lqr_gain(const LinearSystem& sys, const LqrWeights& w,
                        const linalg::Matrix& p_matrix);

// Constant control u = -R^-1 B' (lambda0 * ones(4)); with R = 2I this is
// (-lambda0/2, -lambda0/2).
std::array<double, 2> costate_control(double lambda0, const LqrWeights& w);

struct NoControl {};
struct ConstantCostate {
    double lambda0 = 0.0;
};
struct LqrTimeVarying {
    const RiccatiSolution* riccati = nullptr;
    const LqrWeights* weights = nullptr;
};
using Controller = std::variant<NoControl, ConstantCostate, LqrTimeVarying>;

// Integrates dx/dt = rhs(p, x) + B u(t) and records u at each sample. With
// NoControl the run is the plain model integration on the same grid (u is
// recorded as zero). LqrTimeVarying evaluates u(t) = -R^-1 B' P(t) x(t) with
// P held at the nearest Riccati grid sample; the grid must cover [0, horizon]
// or GridCoverageError is thrown. ConstantCostate uses reference_weights().
ode::Trajectory simulate_controlled(const ModelParams& p, const Controller& controller,
                                    const StateVec& initial, double horizon, double step);

// Composite-trapezoid quadrature of (x'Gx + u'Ru)/2 over the sample grid.
// The trajectory must carry controls (all-zero controls are fine).
double evaluate_cost(const ode::Trajectory& traj, const LqrWeights& w);

// Running partial sums of the same quadrature, one value per sample; the last
// entry equals evaluate_cost.
std::vector<double> cumulative_cost(const ode::Trajectory& traj, const LqrWeights& w);

} // namespace siqr::control
