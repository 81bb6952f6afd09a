#pragma once

#include "siqr/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace siqr {

// The eight rates of the vaccinated SIQR model. All rates are per unit time
// except alpha, which is per individual per unit time. Time is measured in
// the same unit as integration steps; there is no unit conversion layer.
struct ModelParams {
    double delta;    // recruitment into the susceptible class
    double alpha;    // effective contact rate
    double gamma;    // natural recovery rate
    double mu;       // natural death rate
    double eta;      // quarantine rate of the infectious class
    double epsilon;  // disease-related death rate
    double rho;      // quarantine-to-recovered rate
    double v;        // vaccination rate

    // gamma + mu + eta, the total outflow rate of the infectious class.
    double removal_rate() const { return gamma + mu + eta; }
};

// Compartment occupancies (S, I, Q, R) at an instant.
struct StateVec {
    double s = 0.0;
    double i = 0.0;
    double q = 0.0;
    double r = 0.0;
};

enum class EquilibriumKind { DiseaseFree, Endemic };

struct EquilibriumReport {
    EquilibriumKind kind;
    std::optional<StateVec> point;  // unset when an endemic equilibrium does not exist
    double r0 = 0.0;
    bool exists = false;
};

struct ValidationReport {
    ModelParams params;
    std::vector<std::string> warnings;
};

// Checks that every rate is finite and nonnegative, that mu > 0, and that
// alpha > 0. Throws ValidationError naming the offending field. eta < epsilon
// is legal but flagged with a warning: the quarantine inflow coefficient
// eta - epsilon turns negative and Q can be driven below zero.
ValidationReport validate_params(const ModelParams& raw);

// Time derivatives of (S, I, Q, R). Setting v = 0 recovers the model without
// vaccination.
StateVec rhs(const ModelParams& p, const StateVec& x);

double total_population(const StateVec& x);

// Basic reproduction number (delta / (mu + v)) * (alpha / (gamma + mu + eta)).
// Strictly decreasing in both v and eta.
double r0(const ModelParams& p);

// (delta / (mu + v), 0, 0, 0); always exists.
EquilibriumReport disease_free_equilibrium(const ModelParams& p);

// Closed-form endemic equilibrium; exists iff r0 > 1. Nonexistence is a
// report field, not an error, so parameter sweeps can cross the threshold.
EquilibriumReport endemic_equilibrium(const ModelParams& p);

// Jacobian of rhs at an arbitrary state:
//   row 1: (-alpha*I - mu - v, -alpha*S,             0,          0)
//   row 2: ( alpha*I,           alpha*S - (g+mu+eta), 0,          0)
//   row 3: ( 0,                 eta - epsilon,       -(rho+mu),   0)
//   row 4: ( 0,                 gamma,                rho,       -mu)
linalg::Matrix jacobian(const ModelParams& p, const StateVec& x);

// Sensitivity magnitudes of r0:
//   |dR0/dv|   = delta*alpha / ((mu+v)^2 (gamma+mu+eta))
//   |dR0/deta| = delta*alpha / ((mu+v) (gamma+mu+eta)^2)
struct R0Sensitivity {
    double dv = 0.0;
    double deta = 0.0;
};

R0Sensitivity r0_gradient(const ModelParams& p);

} // namespace siqr
