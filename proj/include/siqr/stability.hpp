#pragma once

#include "siqr/linalg.hpp"
#include "siqr/model.hpp"
#include "siqr/ode.hpp"

#include <optional>

namespace siqr::stability {

enum class Classification { AsymptoticallyStable, Unstable, Marginal };

struct StabilityVerdict {
    StateVec point;
    linalg::EigenSet eigenvalues;
    Classification classification = Classification::Marginal;
    double r0 = 0.0;
    // Whether the eigenvalue classification matches the R0-threshold
    // prediction for this equilibrium (stable disease-free iff R0 < 1; the
    // endemic point stable whenever it exists).
    bool theorem_consistent = false;
};

// Classifies an equilibrium by the eigenvalues of the Jacobian at that point.
// The point must satisfy ||rhs||_inf <= 1e-8 or NumericError is thrown.
// Real parts within +-tol_margin of zero classify as Marginal so that
// threshold parameter sets (R0 = 1) are not misread through rounding.
StabilityVerdict classify(const ModelParams& p, const StateVec& point,
                          double tol_margin = 1e-9);

struct DfeLyapunovReport {
    double final_infected = 0.0;
    bool infected_below_tol = false;
    // I nonincreasing at every sample where S <= (gamma+mu+eta)/alpha, the
    // regime where dI/dt <= 0 holds pointwise. No claim is made while S is
    // above that threshold (I can rise there).
    bool monotone_in_regime = false;
    std::optional<size_t> regime_start_index;
    std::optional<double> regime_start_time;
};

// Trajectory-level check of the disease-free convergence claim. Requires
// r0(p) < 1.
DfeLyapunovReport verify_dfe_lyapunov(const ode::Trajectory& traj, const ModelParams& p,
                                      double tol_zero = 1e-4);

// L(x) = 0.5 * ((S-S*) + (I-I*) + (Q-Q*) + (R-R*))^2, identically
// 0.5 * (N - N*)^2.
double endemic_lyapunov(const StateVec& x, const StateVec& equilibrium);

struct EndemicLyapunovReport {
    double final_lyapunov = 0.0;
    bool lyapunov_below_tol = false;
    double max_final_deviation = 0.0;  // componentwise distance of the final state from E*
    bool near_equilibrium = false;
    double descent_fraction_last_half = 0.0;
};

// Trajectory-level check of the endemic convergence claim. Requires r0(p) > 1.
EndemicLyapunovReport verify_endemic_lyapunov(const ode::Trajectory& traj, const ModelParams& p,
                                              double tol = 1e-5, double tol_state = 5e-3);

struct InvariantRegionReport {
    double min_component = 0.0;                // over all samples and compartments
    double max_population_excess = 0.0;        // max over samples of N(t) - max(N(0), delta/mu)
};

InvariantRegionReport invariant_region_check(const ode::Trajectory& traj, const ModelParams& p);

} // namespace siqr::stability
