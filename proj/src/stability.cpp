#include "siqr/stability.hpp"

#include "siqr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace siqr::stability {

namespace {

StateVec state_at(const ode::Trajectory& traj, size_t k) {
    const auto x = traj.state(k);
    return StateVec{x[0], x[1], x[2], x[3]};
}

void require_siqr_trajectory(const ode::Trajectory& traj) {
    if (traj.dim() != 4 || traj.size() < 2) {
        throw ShapeError("expected a (S, I, Q, R) trajectory with at least two samples");
    }
}

} // namespace

StabilityVerdict classify(const ModelParams& p, const StateVec& point, double tol_margin) {
    const StateVec d = rhs(p, point);
    const double residual = std::max(std::max(std::abs(d.s), std::abs(d.i)),
                                     std::max(std::abs(d.q), std::abs(d.r)));
    if (residual > 1e-8) {
        throw NumericError("point is not an equilibrium (rhs residual " +
                           std::to_string(residual) + ")");
    }

    StabilityVerdict verdict;
    verdict.point = point;
    verdict.eigenvalues = linalg::eigenvalues(jacobian(p, point));
    verdict.r0 = r0(p);

    const double max_re = verdict.eigenvalues.max_real_part();
    if (max_re < -tol_margin) {
        verdict.classification = Classification::AsymptoticallyStable;
    } else if (max_re > tol_margin) {
        verdict.classification = Classification::Unstable;
    } else {
        verdict.classification = Classification::Marginal;
    }

    const bool is_disease_free = std::abs(point.i) <= 1e-9 && std::abs(point.q) <= 1e-9;
    Classification predicted;
    if (is_disease_free) {
        if (verdict.r0 < 1.0 - tol_margin) {
            predicted = Classification::AsymptoticallyStable;
        } else if (verdict.r0 > 1.0 + tol_margin) {
            predicted = Classification::Unstable;
        } else {
            predicted = Classification::Marginal;
        }
    } else {
        // The endemic point only exists for R0 > 1, where it is predicted
        // stable.
        predicted = Classification::AsymptoticallyStable;
    }
    verdict.theorem_consistent = verdict.classification == predicted;
    return verdict;
}

DfeLyapunovReport verify_dfe_lyapunov(const ode::Trajectory& traj, const ModelParams& p,
                                      double tol_zero) {
    require_siqr_trajectory(traj);
    const double r = r0(p);
    if (r >= 1.0) {
        throw NumericError("disease-free check requires r0 < 1, got r0 = " + std::to_string(r));
    }

    const double s_threshold = p.removal_rate() / p.alpha;
    DfeLyapunovReport report;
    report.monotone_in_regime = true;

    const size_t n = traj.size();
    for (size_t k = 0; k < n; ++k) {
        const StateVec x = state_at(traj, k);
        if (x.s <= s_threshold) {
            if (!report.regime_start_index) {
                report.regime_start_index = k;
                report.regime_start_time = traj.time(k);
            }
            if (k + 1 < n) {
                const StateVec next = state_at(traj, k + 1);
                if (next.i > x.i * (1.0 + 1e-12) + 1e-15) {
                    report.monotone_in_regime = false;
                }
            }
        }
    }

    report.final_infected = state_at(traj, n - 1).i;
    report.infected_below_tol = report.final_infected <= tol_zero;
    return report;
}

double endemic_lyapunov(const StateVec& x, const StateVec& equilibrium) {
    const double deviation = (x.s - equilibrium.s) + (x.i - equilibrium.i) +
                             (x.q - equilibrium.q) + (x.r - equilibrium.r);
    return 0.5 * deviation * deviation;
}

EndemicLyapunovReport verify_endemic_lyapunov(const ode::Trajectory& traj, const ModelParams& p,
                                              double tol, double tol_state) {
    require_siqr_trajectory(traj);
    const EquilibriumReport endemic = endemic_equilibrium(p);
    if (!endemic.exists) {
        throw NumericError("endemic check requires r0 > 1, got r0 = " +
                           std::to_string(endemic.r0));
    }
    const StateVec estar = *endemic.point;

    EndemicLyapunovReport report;
    const size_t n = traj.size();

    report.final_lyapunov = endemic_lyapunov(state_at(traj, n - 1), estar);
    report.lyapunov_below_tol = report.final_lyapunov <= tol;

    const StateVec last = state_at(traj, n - 1);
    report.max_final_deviation =
        std::max(std::max(std::abs(last.s - estar.s), std::abs(last.i - estar.i)),
                 std::max(std::abs(last.q - estar.q), std::abs(last.r - estar.r)));
    report.near_equilibrium = report.max_final_deviation <= tol_state;

    size_t descending = 0;
    size_t counted = 0;
    for (size_t k = n / 2; k + 1 < n; ++k) {
        const double lk = endemic_lyapunov(state_at(traj, k), estar);
        const double lk1 = endemic_lyapunov(state_at(traj, k + 1), estar);
        ++counted;
        if (lk1 <= lk + 1e-15) {
            ++descending;
        }
    }
    report.descent_fraction_last_half =
        counted == 0 ? 1.0 : static_cast<double>(descending) / static_cast<double>(counted);
    return report;
}

InvariantRegionReport invariant_region_check(const ode::Trajectory& traj, const ModelParams& p) {
    require_siqr_trajectory(traj);
    InvariantRegionReport report;
    const StateVec first = state_at(traj, 0);
    const double cap = std::max(total_population(first), p.delta / p.mu);

    double min_component = std::numeric_limits<double>::infinity();
    double max_excess = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < traj.size(); ++k) {
        for (double c : traj.state(k)) {
            min_component = std::min(min_component, c);
        }
        const StateVec x = state_at(traj, k);
        max_excess = std::max(max_excess, total_population(x) - cap);
    }
    report.min_component = min_component;
    report.max_population_excess = max_excess;
    return report;
}

} // namespace siqr::stability
