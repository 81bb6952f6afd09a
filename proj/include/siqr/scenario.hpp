#pragma once

#include "siqr/control.hpp"
#include "siqr/model.hpp"
#include "siqr/ode.hpp"
#include "siqr/stability.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace siqr::io {

enum class ControllerKind { None, Costate, Lqr };

struct ControllerSpec {
    ControllerKind kind = ControllerKind::None;
    double lambda0 = 0.0;                                   // costate
    control::LqrWeights weights;                            // lqr
    control::DreMode riccati_mode = control::DreMode::BackwardFromTerminal;  // lqr
    double riccati_horizon = 0.0;                           // lqr
};

// A declarative experiment: model parameters, initial state, run window, and
// the controller to apply. Serialized as strict JSON; unknown keys are
// rejected so a misspelled parameter cannot silently fall back to a default.
struct Scenario {
    ModelParams params{};
    StateVec initial{};
    double horizon = 0.0;
    double step = 0.0;
    ControllerSpec controller{};
    std::vector<std::string> outputs;  // subset of {"csv", "svg"}
};

Scenario load_scenario(const std::filesystem::path& path);
void write_scenario_json(const Scenario& scenario, const std::filesystem::path& path);

struct AnalysisReport {
    double r0 = 0.0;
    EquilibriumReport dfe;
    EquilibriumReport endemic;
    std::optional<stability::StabilityVerdict> dfe_verdict;
    std::optional<stability::StabilityVerdict> endemic_verdict;
    int controllability_rank = 0;
    bool controllable = false;
    R0Sensitivity sensitivities;
    std::vector<std::string> warnings;
};

// Aggregates equilibria, stability verdicts, controllability, and R0
// sensitivities for one parameter set.
AnalysisReport analyze_model(const ModelParams& params);

bool report_theorem_consistent(const AnalysisReport& report);

void write_report_json(const AnalysisReport& report, const std::filesystem::path& path);

// Columns exactly t,S,I,Q,R,N,u1,u2,J_cum. u columns are zero when the
// trajectory has no controls. J_cum is the running trapezoid cost when both
// controls and weights are available, zero otherwise. Reals are written as
// shortest round-trip decimals, so identical runs produce identical bytes.
void write_trajectory_csv(const ode::Trajectory& traj, const std::filesystem::path& path,
                          const control::LqrWeights* cost_weights = nullptr);

// One polyline per compartment plus a legend; long runs are decimated to a
// fixed point budget so the output stays plottable.
void render_svg(const ode::Trajectory& traj, const std::filesystem::path& path);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

} // namespace siqr::io
