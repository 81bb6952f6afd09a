#include "siqr/control.hpp"
#include "siqr/errors.hpp"
#include "siqr/model.hpp"
#include "siqr/ode.hpp"
#include "siqr/scenario.hpp"
#include "siqr/stability.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// Exit codes: 0 success, 1 config error, 2 I/O error, 3 theorem
// inconsistency, 4 Riccati grid coverage.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;
constexpr int kExitInconsistent = 3;
constexpr int kExitGridCoverage = 4;

struct Invocation {
    std::string scenario_path;
    std::string out_dir;
    std::vector<std::string> overrides;
    std::string sweep_key;
    std::string sweep_values;
};

double parse_number(const std::string& text, const std::string& field) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc{} || result.ptr != end) {
        throw siqr::ValidationError(field, "cannot parse number from '" + text + "'");
    }
    return value;
}

void apply_override(siqr::io::Scenario& scenario, const std::string& key, double value) {
    siqr::ModelParams& p = scenario.params;
    if (key == "delta") {
        p.delta = value;
    } else if (key == "alpha") {
        p.alpha = value;
    } else if (key == "gamma") {
        p.gamma = value;
    } else if (key == "mu") {
        p.mu = value;
    } else if (key == "eta") {
        p.eta = value;
    } else if (key == "epsilon") {
        p.epsilon = value;
    } else if (key == "rho") {
        p.rho = value;
    } else if (key == "v") {
        p.v = value;
    } else if (key == "s") {
        scenario.initial.s = value;
    } else if (key == "i") {
        scenario.initial.i = value;
    } else if (key == "q") {
        scenario.initial.q = value;
    } else if (key == "r") {
        scenario.initial.r = value;
    } else if (key == "horizon") {
        scenario.horizon = value;
    } else if (key == "step") {
        scenario.step = value;
    } else if (key == "lambda0") {
        scenario.controller.lambda0 = value;
    } else {
        throw siqr::UnknownKeyError(key);
    }
}

siqr::io::Scenario load_with_overrides(const Invocation& inv) {
    siqr::io::Scenario scenario = siqr::io::load_scenario(inv.scenario_path);
    for (const std::string& assignment : inv.overrides) {
        const size_t eq = assignment.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw siqr::ValidationError("set", "override must look like key=value, got '" +
                                                   assignment + "'");
        }
        const std::string key = assignment.substr(0, eq);
        apply_override(scenario, key, parse_number(assignment.substr(eq + 1), key));
    }
    siqr::validate_params(scenario.params);
    if (!(scenario.horizon > 0.0) || !(scenario.step > 0.0) ||
        scenario.step > scenario.horizon) {
        throw siqr::ValidationError("step", "need 0 < step <= horizon after overrides");
    }
    return scenario;
}

fs::path ensure_out_dir(const Invocation& inv) {
    fs::path dir(inv.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw siqr::IoError(dir.string(), "cannot create output directory");
    }
    return dir;
}

// Runs the scenario as configured: plain integration, constant costate, or
// time-varying LQR backed by a Riccati sweep on the scenario step.
struct RunResult {
    siqr::ode::Trajectory trajectory;
    std::optional<siqr::control::RiccatiSolution> riccati;
};

RunResult run_scenario(const siqr::io::Scenario& scenario) {
    using siqr::control::Controller;
    if (scenario.controller.kind == siqr::io::ControllerKind::Lqr) {
        auto riccati = siqr::control::dre_integrate(
            siqr::control::build_system(scenario.params), scenario.controller.weights,
            scenario.controller.riccati_horizon, scenario.step, scenario.controller.riccati_mode,
            siqr::linalg::Matrix(4, 4));
        siqr::control::LqrTimeVarying lqr{&riccati, &scenario.controller.weights};
        auto traj = siqr::control::simulate_controlled(scenario.params, Controller{lqr},
                                                       scenario.initial, scenario.horizon,
                                                       scenario.step);
        return {std::move(traj), std::move(riccati)};
    }
    Controller controller = siqr::control::NoControl{};
    if (scenario.controller.kind == siqr::io::ControllerKind::Costate) {
        controller = siqr::control::ConstantCostate{scenario.controller.lambda0};
    }
    auto traj = siqr::control::simulate_controlled(scenario.params, controller, scenario.initial,
                                                   scenario.horizon, scenario.step);
    return {std::move(traj), std::nullopt};
}

void write_run_outputs(const siqr::io::Scenario& scenario, const RunResult& result,
                       const fs::path& out_dir) {
    const bool want_csv = std::find(scenario.outputs.begin(), scenario.outputs.end(), "csv") !=
                          scenario.outputs.end();
    const bool want_svg = std::find(scenario.outputs.begin(), scenario.outputs.end(), "svg") !=
                          scenario.outputs.end();
    const siqr::control::LqrWeights* weights =
        scenario.controller.kind == siqr::io::ControllerKind::Lqr ? &scenario.controller.weights
                                                                  : nullptr;
    if (want_csv) {
        siqr::io::write_trajectory_csv(result.trajectory, out_dir / "trajectory.csv", weights);
    }
    if (want_svg) {
        siqr::io::render_svg(result.trajectory, out_dir / "trajectory.svg");
    }
}

int cmd_analyze(const Invocation& inv) {
    const siqr::io::Scenario scenario = load_with_overrides(inv);
    const fs::path out_dir = ensure_out_dir(inv);
    const siqr::io::AnalysisReport report = siqr::io::analyze_model(scenario.params);
    siqr::io::write_report_json(report, out_dir / "report.json");

    std::cout << "r0 = " << siqr::io::format_double(report.r0) << "\n";
    std::cout << "disease-free point: s = "
              << siqr::io::format_double(report.dfe.point->s) << "\n";
    std::cout << "endemic equilibrium " << (report.endemic.exists ? "exists" : "absent") << "\n";
    std::cout << "controllability rank = " << report.controllability_rank << "\n";
    for (const std::string& warning : report.warnings) {
        std::cout << "warning: " << warning << "\n";
    }

    if (!siqr::io::report_theorem_consistent(report)) {
        std::cout << "stability verdicts do not match the R0 threshold\n";
        return kExitInconsistent;
    }
    std::cout << "stability verdicts consistent with the R0 threshold\n";
    return kExitOk;
}

int cmd_simulate(const Invocation& inv) {
    const siqr::io::Scenario scenario = load_with_overrides(inv);
    const fs::path out_dir = ensure_out_dir(inv);
    const RunResult result = run_scenario(scenario);
    write_run_outputs(scenario, result, out_dir);
    const auto last = result.trajectory.state(result.trajectory.size() - 1);
    std::cout << "simulated " << result.trajectory.size() << " samples to t = "
              << siqr::io::format_double(result.trajectory.time(result.trajectory.size() - 1))
              << "\n";
    std::cout << "final state: (" << siqr::io::format_double(last[0]) << ", "
              << siqr::io::format_double(last[1]) << ", " << siqr::io::format_double(last[2])
              << ", " << siqr::io::format_double(last[3]) << ")\n";
    return kExitOk;
}

int cmd_controllability(const Invocation& inv) {
    const siqr::io::Scenario scenario = load_with_overrides(inv);
    const fs::path out_dir = ensure_out_dir(inv);

    const siqr::control::LinearSystem sys = siqr::control::build_system(scenario.params);
    const siqr::linalg::Matrix wc = siqr::control::controllability_matrix(sys);
    const int rank = siqr::linalg::rank(wc);

    ordered_json doc;
    doc["rank"] = rank;
    doc["controllable"] = rank == 4;
    doc["tolerance"] = 1e-10;
    ordered_json rows = ordered_json::array();
    for (int r = 0; r < wc.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < wc.cols(); ++c) {
            row.push_back(wc(r, c));
        }
        rows.push_back(row);
    }
    doc["controllability_matrix"] = rows;

    std::ofstream out(out_dir / "controllability.json", std::ios::binary | std::ios::trunc);
    if (!out) {
        throw siqr::IoError((out_dir / "controllability.json").string(), "cannot write file");
    }
    out << doc.dump(2) << "\n";

    std::cout << "rank(Wc) = " << rank << (rank == 4 ? " (controllable)\n" : "\n");
    return kExitOk;
}

int cmd_lqr(const Invocation& inv) {
    const siqr::io::Scenario scenario = load_with_overrides(inv);
    if (scenario.controller.kind != siqr::io::ControllerKind::Lqr) {
        throw siqr::ValidationError("controller", "lqr subcommand needs a scenario with an lqr controller");
    }
    const fs::path out_dir = ensure_out_dir(inv);
    const RunResult result = run_scenario(scenario);
    write_run_outputs(scenario, result, out_dir);

    const siqr::control::RiccatiSolution& riccati = *result.riccati;
    const siqr::control::LinearSystem sys = siqr::control::build_system(scenario.params);
    const siqr::linalg::Matrix gain =
        siqr::control::lqr_gain(sys, scenario.controller.weights, riccati.p_matrices.back());
    const siqr::linalg::Matrix a_cl = sys.a - sys.b * gain;
    const siqr::linalg::EigenSet cl_eigs = siqr::linalg::eigenvalues(a_cl);
    const double cost =
        siqr::control::evaluate_cost(result.trajectory, scenario.controller.weights);

    ordered_json doc;
    doc["mode"] = scenario.controller.riccati_mode == siqr::control::DreMode::ForwardFromInitial
                      ? "forward"
                      : "backward";
    doc["riccati_horizon"] = scenario.controller.riccati_horizon;
    doc["step"] = scenario.step;
    doc["converged"] = riccati.converged;
    doc["final_are_residual"] = riccati.final_are_residual;
    ordered_json p_final = ordered_json::array();
    for (int r = 0; r < 4; ++r) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < 4; ++c) {
            row.push_back(riccati.p_matrices.back()(r, c));
        }
        p_final.push_back(row);
    }
    doc["p_final"] = p_final;
    ordered_json gain_rows = ordered_json::array();
    for (int r = 0; r < 2; ++r) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < 4; ++c) {
            row.push_back(gain(r, c));
        }
        gain_rows.push_back(row);
    }
    doc["gain"] = gain_rows;
    ordered_json eigs = ordered_json::array();
    for (const auto& z : cl_eigs.values) {
        eigs.push_back(ordered_json::array({z.real(), z.imag()}));
    }
    doc["closed_loop_eigenvalues"] = eigs;
    doc["cost"] = cost;

    std::ofstream out(out_dir / "riccati.json", std::ios::binary | std::ios::trunc);
    if (!out) {
        throw siqr::IoError((out_dir / "riccati.json").string(), "cannot write file");
    }
    out << doc.dump(2) << "\n";

    std::cout << "Riccati sweep " << (riccati.converged ? "converged" : "did not converge")
              << ", residual = " << siqr::io::format_double(riccati.final_are_residual) << "\n";
    std::cout << "closed-loop max Re(lambda) = "
              << siqr::io::format_double(cl_eigs.max_real_part()) << "\n";
    std::cout << "cost J = " << siqr::io::format_double(cost) << "\n";
    return kExitOk;
}

int cmd_sweep(const Invocation& inv) {
    const siqr::io::Scenario base = load_with_overrides(inv);
    if (inv.sweep_key != "alpha" && inv.sweep_key != "v" && inv.sweep_key != "eta") {
        throw siqr::ValidationError("key", "sweep key must be one of alpha, v, eta");
    }
    std::vector<double> values;
    if (!inv.sweep_values.empty()) {
        size_t begin = 0;
        while (begin <= inv.sweep_values.size()) {
            const size_t comma = inv.sweep_values.find(',', begin);
            const std::string token =
                inv.sweep_values.substr(begin, comma == std::string::npos ? std::string::npos
                                                                          : comma - begin);
            values.push_back(parse_number(token, "values"));
            if (comma == std::string::npos) {
                break;
            }
            begin = comma + 1;
        }
    }
    const fs::path out_dir = ensure_out_dir(inv);

    std::string csv = "value,r0,S,I,Q,R\n";
    for (double value : values) {
        siqr::io::Scenario point = base;
        apply_override(point, inv.sweep_key, value);
        siqr::validate_params(point.params);
        const double r0_value = siqr::r0(point.params);
        const RunResult result = run_scenario(point);
        const auto last = result.trajectory.state(result.trajectory.size() - 1);
        csv += siqr::io::format_double(value);
        csv += ',';
        csv += siqr::io::format_double(r0_value);
        for (double c : last) {
            csv += ',';
            csv += siqr::io::format_double(c);
        }
        csv += '\n';
        std::cout << inv.sweep_key << " = " << siqr::io::format_double(value)
                  << ": r0 = " << siqr::io::format_double(r0_value) << "\n";
    }

    std::ofstream out(out_dir / "sweep.csv", std::ios::binary | std::ios::trunc);
    if (!out) {
        throw siqr::IoError((out_dir / "sweep.csv").string(), "cannot write file");
    }
    out << csv;
    std::cout << "sweep rows: " << values.size() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vaccinated SIQR epidemic model workbench: equilibria, stability, "
                 "controllability, and finite-horizon LQR synthesis"};
    app.require_subcommand(1);

    Invocation inv;
    const auto add_common = [&inv](CLI::App* cmd) {
        cmd->add_option("--scenario", inv.scenario_path, "Scenario JSON file")->required();
        cmd->add_option("--out", inv.out_dir, "Output directory")->required();
        cmd->add_option("--set", inv.overrides,
                        "Override a scenario value, key=value (repeatable)");
    };

    CLI::App* analyze = app.add_subcommand("analyze", "Equilibria, stability, controllability report");
    add_common(analyze);
    CLI::App* simulate = app.add_subcommand("simulate", "Integrate the scenario and write CSV/SVG");
    add_common(simulate);
    CLI::App* controllability =
        app.add_subcommand("controllability", "Kalman controllability matrix and rank");
    add_common(controllability);
    CLI::App* lqr = app.add_subcommand("lqr", "Riccati sweep, gain, and controlled run");
    add_common(lqr);
    CLI::App* sweep = app.add_subcommand("sweep", "Evaluate r0 and final states over parameter values");
    add_common(sweep);
    sweep->add_option("--key", inv.sweep_key, "Swept parameter: alpha, v, or eta")->required();
    sweep->add_option("--values", inv.sweep_values, "Comma-separated values (may be empty)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (analyze->parsed()) {
            return cmd_analyze(inv);
        }
        if (simulate->parsed()) {
            return cmd_simulate(inv);
        }
        if (controllability->parsed()) {
            return cmd_controllability(inv);
        }
        if (lqr->parsed()) {
            return cmd_lqr(inv);
        }
        if (sweep->parsed()) {
            return cmd_sweep(inv);
        }
    } catch (const siqr::GridCoverageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitGridCoverage;
    } catch (const siqr::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const siqr::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const siqr::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const siqr::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
