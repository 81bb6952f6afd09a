#include "siqr/scenario.hpp"

#include "siqr/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>

namespace siqr::io {

namespace {

using nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path.string(), "cannot open file");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (!in.good() && !in.eof()) {
        throw IoError(path.string(), "cannot read file");
    }
    return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(path.string(), "cannot open file for writing");
    }
    out << contents;
    out.flush();
    if (!out.good()) {
        throw IoError(path.string(), "cannot write file");
    }
}

int line_of_byte(const std::string& text, size_t byte) {
    const size_t end = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + end, '\n'));
}

void require_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                  const std::string& context) {
    for (const auto& item : obj.items()) {
        if (!allowed.contains(item.key())) {
            throw UnknownKeyError(context.empty() ? item.key() : context + "." + item.key());
        }
    }
}

double get_number(const ordered_json& obj, const std::string& key, const std::string& context) {
    const std::string field = context.empty() ? key : context + "." + key;
    if (!obj.contains(key)) {
        throw ValidationError(field, "missing required field " + field);
    }
    if (!obj[key].is_number()) {
        throw ValidationError(field, "field " + field + " must be a number");
    }
    return obj[key].get<double>();
}

linalg::Matrix get_matrix(const ordered_json& obj, const std::string& key, int rows, int cols,
                          const std::string& context) {
    const std::string field = context + "." + key;
    if (!obj.contains(key) || !obj[key].is_array() ||
        obj[key].size() != static_cast<size_t>(rows)) {
        throw ValidationError(field, "field " + field + " must be a " + std::to_string(rows) +
                                         "x" + std::to_string(cols) + " array of arrays");
    }
    std::vector<double> entries;
    entries.reserve(static_cast<size_t>(rows) * cols);
    for (const auto& row : obj[key]) {
        if (!row.is_array() || row.size() != static_cast<size_t>(cols)) {
            throw ValidationError(field, "field " + field + " must have rows of length " +
                                             std::to_string(cols));
        }
        for (const auto& cell : row) {
            if (!cell.is_number()) {
                throw ValidationError(field, "field " + field + " must contain numbers only");
            }
            entries.push_back(cell.get<double>());
        }
    }
    return linalg::Matrix(rows, cols, std::move(entries));
}

ordered_json matrix_to_json(const linalg::Matrix& m) {
    ordered_json rows = ordered_json::array();
    for (int r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(row);
    }
    return rows;
}

ControllerSpec parse_controller(const ordered_json& obj) {
    ControllerSpec spec;
    if (!obj.is_object() || !obj.contains("type") || !obj["type"].is_string()) {
        throw ValidationError("controller", "controller must be an object with a string type");
    }
    const std::string type = obj["type"].get<std::string>();
    if (type == "none") {
        require_keys(obj, {"type"}, "controller");
        spec.kind = ControllerKind::None;
    } else if (type == "costate") {
        require_keys(obj, {"type", "lambda0"}, "controller");
        spec.kind = ControllerKind::Costate;
        spec.lambda0 = get_number(obj, "lambda0", "controller");
        if (!std::isfinite(spec.lambda0)) {
            throw ValidationError("controller.lambda0", "lambda0 must be finite");
        }
    } else if (type == "lqr") {
        require_keys(obj, {"type", "weights", "riccati_mode", "riccati_horizon"}, "controller");
        spec.kind = ControllerKind::Lqr;
        if (!obj.contains("weights") || !obj["weights"].is_object()) {
            throw ValidationError("controller.weights", "lqr controller needs a weights object");
        }
        require_keys(obj["weights"], {"g", "r"}, "controller.weights");
        spec.weights.g = get_matrix(obj["weights"], "g", 4, 4, "controller.weights");
        spec.weights.r = get_matrix(obj["weights"], "r", 2, 2, "controller.weights");
        control::validate_weights(spec.weights);
        if (!obj.contains("riccati_mode") || !obj["riccati_mode"].is_string()) {
            throw ValidationError("controller.riccati_mode",
                                  "riccati_mode must be \"forward\" or \"backward\"");
        }
        const std::string mode = obj["riccati_mode"].get<std::string>();
        if (mode == "forward") {
            spec.riccati_mode = control::DreMode::ForwardFromInitial;
        } else if (mode == "backward") {
            spec.riccati_mode = control::DreMode::BackwardFromTerminal;
        } else {
            throw ValidationError("controller.riccati_mode",
                                  "riccati_mode must be \"forward\" or \"backward\"");
        }
        spec.riccati_horizon = get_number(obj, "riccati_horizon", "controller");
        if (!(spec.riccati_horizon > 0.0)) {
            throw ValidationError("controller.riccati_horizon",
                                  "riccati_horizon must be strictly positive");
        }
    } else {
        throw ValidationError("controller.type",
                              "controller type must be none, costate, or lqr");
    }
    return spec;
}

} // namespace

Scenario load_scenario(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw ParseError(line_of_byte(text, e.byte), e.what());
    }
    if (!doc.is_object()) {
        throw ParseError(1, "scenario must be a JSON object");
    }

    require_keys(doc, {"params", "initial", "horizon", "step", "controller", "outputs"}, "");

    Scenario scenario;

    if (!doc.contains("params") || !doc["params"].is_object()) {
        throw ValidationError("params", "missing params object");
    }
    const ordered_json& params = doc["params"];
    require_keys(params,
                 {"delta", "alpha", "gamma", "mu", "eta", "epsilon", "rho", "v"}, "params");
    scenario.params.delta = get_number(params, "delta", "params");
    scenario.params.alpha = get_number(params, "alpha", "params");
    scenario.params.gamma = get_number(params, "gamma", "params");
    scenario.params.mu = get_number(params, "mu", "params");
    scenario.params.eta = get_number(params, "eta", "params");
    scenario.params.epsilon = get_number(params, "epsilon", "params");
    scenario.params.rho = get_number(params, "rho", "params");
    scenario.params.v = get_number(params, "v", "params");
    validate_params(scenario.params);

    if (!doc.contains("initial") || !doc["initial"].is_object()) {
        throw ValidationError("initial", "missing initial state object");
    }
    const ordered_json& initial = doc["initial"];
    require_keys(initial, {"s", "i", "q", "r"}, "initial");
    scenario.initial.s = get_number(initial, "s", "initial");
    scenario.initial.i = get_number(initial, "i", "initial");
    scenario.initial.q = get_number(initial, "q", "initial");
    scenario.initial.r = get_number(initial, "r", "initial");
    for (double c : {scenario.initial.s, scenario.initial.i, scenario.initial.q,
                     scenario.initial.r}) {
        if (!std::isfinite(c)) {
            throw ValidationError("initial", "initial state must be finite");
        }
    }

    scenario.horizon = get_number(doc, "horizon", "");
    scenario.step = get_number(doc, "step", "");
    if (!(scenario.horizon > 0.0)) {
        throw ValidationError("horizon", "horizon must be strictly positive");
    }
    if (!(scenario.step > 0.0)) {
        throw ValidationError("step", "step must be strictly positive");
    }
    if (scenario.step > scenario.horizon) {
        throw ValidationError("step", "step must not exceed the horizon");
    }

    if (!doc.contains("controller")) {
        throw ValidationError("controller", "missing controller object");
    }
    scenario.controller = parse_controller(doc["controller"]);

    if (doc.contains("outputs")) {
        if (!doc["outputs"].is_array()) {
            throw ValidationError("outputs", "outputs must be an array of strings");
        }
        for (const auto& entry : doc["outputs"]) {
            if (!entry.is_string()) {
                throw ValidationError("outputs", "outputs must be an array of strings");
            }
            const std::string name = entry.get<std::string>();
            if (name != "csv" && name != "svg") {
                throw ValidationError("outputs", "unsupported output kind: " + name);
            }
            scenario.outputs.push_back(name);
        }
    } else {
        scenario.outputs = {"csv", "svg"};
    }
    return scenario;
}

void write_scenario_json(const Scenario& scenario, const std::filesystem::path& path) {
    ordered_json doc;
    doc["params"] = {
        {"delta", scenario.params.delta}, {"alpha", scenario.params.alpha},
        {"gamma", scenario.params.gamma}, {"mu", scenario.params.mu},
        {"eta", scenario.params.eta},     {"epsilon", scenario.params.epsilon},
        {"rho", scenario.params.rho},     {"v", scenario.params.v},
    };
    doc["initial"] = {{"s", scenario.initial.s},
                      {"i", scenario.initial.i},
                      {"q", scenario.initial.q},
                      {"r", scenario.initial.r}};
    doc["horizon"] = scenario.horizon;
    doc["step"] = scenario.step;
    switch (scenario.controller.kind) {
    case ControllerKind::None:
        doc["controller"] = {{"type", "none"}};
        break;
    case ControllerKind::Costate:
        doc["controller"] = {{"type", "costate"}, {"lambda0", scenario.controller.lambda0}};
        break;
    case ControllerKind::Lqr:
        doc["controller"] = {
            {"type", "lqr"},
            {"weights",
             {{"g", matrix_to_json(scenario.controller.weights.g)},
              {"r", matrix_to_json(scenario.controller.weights.r)}}},
            {"riccati_mode",
             scenario.controller.riccati_mode == control::DreMode::ForwardFromInitial
                 ? "forward"
                 : "backward"},
            {"riccati_horizon", scenario.controller.riccati_horizon},
        };
        break;
    }
    doc["outputs"] = scenario.outputs;
    write_file(path, doc.dump(2) + "\n");
}

AnalysisReport analyze_model(const ModelParams& params) {
    const ValidationReport validated = validate_params(params);

    AnalysisReport report;
    report.warnings = validated.warnings;
    report.r0 = r0(params);
    report.dfe = disease_free_equilibrium(params);
    report.endemic = endemic_equilibrium(params);
    report.sensitivities = r0_gradient(params);

    report.dfe_verdict = stability::classify(params, *report.dfe.point);
    if (report.endemic.exists) {
        report.endemic_verdict = stability::classify(params, *report.endemic.point);
    }

    const control::LinearSystem sys = control::build_system(params);
    report.controllability_rank = linalg::rank(control::controllability_matrix(sys));
    report.controllable = report.controllability_rank == 4;
    return report;
}

bool report_theorem_consistent(const AnalysisReport& report) {
    if (!report.dfe_verdict || !report.dfe_verdict->theorem_consistent) {
        return false;
    }
    if (report.endemic.exists) {
        return report.endemic_verdict && report.endemic_verdict->theorem_consistent;
    }
    return true;
}

namespace {

ordered_json state_to_json(const StateVec& x) {
    return {{"s", x.s}, {"i", x.i}, {"q", x.q}, {"r", x.r}};
}

const char* classification_name(stability::Classification c) {
    switch (c) {
    case stability::Classification::AsymptoticallyStable:
        return "asymptotically_stable";
    case stability::Classification::Unstable:
        return "unstable";
    case stability::Classification::Marginal:
        return "marginal";
    }
    return "marginal";
}

ordered_json verdict_to_json(const stability::StabilityVerdict& verdict) {
    ordered_json eigs = ordered_json::array();
    for (const auto& z : verdict.eigenvalues.values) {
        eigs.push_back(ordered_json::array({z.real(), z.imag()}));
    }
    return {{"classification", classification_name(verdict.classification)},
            {"eigenvalues", eigs},
            {"max_real_part", verdict.eigenvalues.max_real_part()},
            {"theorem_consistent", verdict.theorem_consistent}};
}

} // namespace

void write_report_json(const AnalysisReport& report, const std::filesystem::path& path) {
    ordered_json doc;
    doc["r0"] = report.r0;
    doc["r0_sensitivity"] = {{"dv", report.sensitivities.dv},
                             {"deta", report.sensitivities.deta}};
    doc["disease_free"] = {
        {"point", state_to_json(*report.dfe.point)},
        {"stability", report.dfe_verdict ? verdict_to_json(*report.dfe_verdict)
                                         : ordered_json(nullptr)},
    };
    ordered_json endemic;
    endemic["exists"] = report.endemic.exists;
    endemic["point"] =
        report.endemic.exists ? state_to_json(*report.endemic.point) : ordered_json(nullptr);
    endemic["stability"] = report.endemic_verdict ? verdict_to_json(*report.endemic_verdict)
                                                  : ordered_json(nullptr);
    doc["endemic"] = endemic;
    doc["controllability"] = {{"rank", report.controllability_rank},
                              {"controllable", report.controllable}};
    doc["warnings"] = report.warnings;
    write_file(path, doc.dump(2) + "\n");
}

std::string format_double(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

void write_trajectory_csv(const ode::Trajectory& traj, const std::filesystem::path& path,
                          const control::LqrWeights* cost_weights) {
    std::string out;
    out.reserve(traj.size() * 64 + 64);
    out += "t,S,I,Q,R,N,u1,u2,J_cum\n";

    std::vector<double> cumulative;
    const bool with_cost = cost_weights != nullptr && traj.has_controls();
    if (with_cost) {
        cumulative = control::cumulative_cost(traj, *cost_weights);
    }

    for (size_t k = 0; k < traj.size(); ++k) {
        const auto x = traj.state(k);
        out += format_double(traj.time(k));
        for (double c : x) {
            out += ',';
            out += format_double(c);
        }
        out += ',';
        out += format_double(x[0] + x[1] + x[2] + x[3]);
        if (traj.has_controls()) {
            const auto u = traj.control(k);
            out += ',';
            out += format_double(u[0]);
            out += ',';
            out += format_double(u[1]);
        } else {
            out += ",0,0";
        }
        out += ',';
        out += format_double(with_cost ? cumulative[k] : 0.0);
        out += '\n';
    }
    write_file(path, out);
}

namespace {

struct SvgSeries {
    const char* label;
    const char* color;
    int component;
};

} // namespace

void render_svg(const ode::Trajectory& traj, const std::filesystem::path& path) {
    if (traj.dim() != 4 || traj.size() < 2) {
        throw ShapeError("SVG rendering expects a (S, I, Q, R) trajectory with >= 2 samples");
    }

    constexpr int kWidth = 900;
    constexpr int kHeight = 560;
    constexpr int kMarginLeft = 70;
    constexpr int kMarginRight = 150;
    constexpr int kMarginTop = 30;
    constexpr int kMarginBottom = 50;
    constexpr size_t kMaxPoints = 2000;

    const size_t n = traj.size();
    const size_t stride = std::max<size_t>(1, (n + kMaxPoints - 1) / kMaxPoints);

    double y_min = 0.0;
    double y_max = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < n; ++k) {
        for (double c : traj.state(k)) {
            y_min = std::min(y_min, c);
            y_max = std::max(y_max, c);
        }
    }
    if (y_max <= y_min) {
        y_max = y_min + 1.0;
    }
    const double t_min = std::min(traj.time(0), traj.time(n - 1));
    const double t_max = std::max(traj.time(0), traj.time(n - 1));

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    const auto x_of = [&](double t) {
        return kMarginLeft + (t - t_min) / (t_max - t_min) * plot_w;
    };
    const auto y_of = [&](double value) {
        return kMarginTop + (y_max - value) / (y_max - y_min) * plot_h;
    };

    const SvgSeries series[] = {
        {"S", "#1f77b4", 0},
        {"I", "#d62728", 1},
        {"Q", "#ff7f0e", 2},
        {"R", "#2ca02c", 3},
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
           "\" height=\"" + std::to_string(kHeight) + "\" viewBox=\"0 0 " +
           std::to_string(kWidth) + " " + std::to_string(kHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // axes
    svg += "<line x1=\"" + format_double(kMarginLeft) + "\" y1=\"" + format_double(y_of(y_min)) +
           "\" x2=\"" + format_double(kMarginLeft + plot_w) + "\" y2=\"" +
           format_double(y_of(y_min)) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + format_double(kMarginLeft) + "\" y1=\"" + format_double(kMarginTop) +
           "\" x2=\"" + format_double(kMarginLeft) + "\" y2=\"" + format_double(y_of(y_min)) +
           "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 5; ++tick) {
        const double t = t_min + (t_max - t_min) * tick / 5.0;
        const double value = y_min + (y_max - y_min) * tick / 5.0;
        svg += "<text x=\"" + format_double(x_of(t)) + "\" y=\"" +
               format_double(kMarginTop + plot_h + 20.0) +
               "\" font-size=\"12\" text-anchor=\"middle\">" + format_double(t) + "</text>\n";
        svg += "<text x=\"" + format_double(kMarginLeft - 8.0) + "\" y=\"" +
               format_double(y_of(value) + 4.0) +
               "\" font-size=\"12\" text-anchor=\"end\">" + format_double(value) + "</text>\n";
    }
    svg += "<text x=\"" + format_double(kMarginLeft + plot_w / 2.0) + "\" y=\"" +
           format_double(kHeight - 10.0) +
           "\" font-size=\"13\" text-anchor=\"middle\">t</text>\n";

    for (const SvgSeries& s : series) {
        svg += "<polyline fill=\"none\" stroke=\"";
        svg += s.color;
        svg += "\" stroke-width=\"1.5\" points=\"";
        for (size_t k = 0; k < n; k += stride) {
            const size_t idx = std::min(k, n - 1);
            svg += format_double(x_of(traj.time(idx)));
            svg += ',';
            svg += format_double(y_of(traj.state(idx)[static_cast<size_t>(s.component)]));
            svg += ' ';
        }
        // keep the terminal sample regardless of stride
        svg += format_double(x_of(traj.time(n - 1)));
        svg += ',';
        svg += format_double(y_of(traj.state(n - 1)[static_cast<size_t>(s.component)]));
        svg += "\"/>\n";
    }

    double legend_y = kMarginTop + 10.0;
    for (const SvgSeries& s : series) {
        const double lx = kMarginLeft + plot_w + 20.0;
        svg += "<line x1=\"" + format_double(lx) + "\" y1=\"" + format_double(legend_y) +
               "\" x2=\"" + format_double(lx + 24.0) + "\" y2=\"" + format_double(legend_y) +
               "\" stroke=\"";
        svg += s.color;
        svg += "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + format_double(lx + 30.0) + "\" y=\"" +
               format_double(legend_y + 4.0) + "\" font-size=\"13\">";
        svg += s.label;
        svg += "</text>\n";
        legend_y += 20.0;
    }

    svg += "</svg>\n";
    write_file(path, svg);
}

} // namespace siqr::io
