#include "siqr/model.hpp"

#include "siqr/errors.hpp"

#include <cmath>

namespace siqr {

namespace {

struct Field {
    const char* name;
    double value;
};

} // namespace

ValidationReport validate_params(const ModelParams& raw) {
    const Field fields[] = {
        {"delta", raw.delta}, {"alpha", raw.alpha}, {"gamma", raw.gamma},
        {"mu", raw.mu},       {"eta", raw.eta},     {"epsilon", raw.epsilon},
        {"rho", raw.rho},     {"v", raw.v},
    };
    for (const Field& f : fields) {
        if (!std::isfinite(f.value)) {
            throw ValidationError(f.name, std::string("parameter ") + f.name + " is not finite");
        }
    }
    for (const Field& f : fields) {
        if (f.value < 0.0) {
            throw ValidationError(f.name, std::string("parameter ") + f.name + " must be nonnegative");
        }
    }
    if (raw.mu == 0.0) {
        throw ValidationError("mu", "parameter mu must be strictly positive");
    }
    if (raw.alpha == 0.0) {
        throw ValidationError("alpha", "parameter alpha must be strictly positive");
    }

    ValidationReport report{raw, {}};
    if (raw.eta < raw.epsilon) {
        report.warnings.push_back(
            "eta < epsilon: quarantine inflow coefficient eta - epsilon is negative, "
            "Q can leave the nonnegative orthant");
    }
    return report;
}

StateVec rhs(const ModelParams& p, const StateVec& x) {
    StateVec d;
    d.s = p.delta - p.alpha * x.s * x.i - p.mu * x.s - p.v * x.s;
    d.i = p.alpha * x.s * x.i - p.removal_rate() * x.i;
    d.q = (p.eta - p.epsilon) * x.i - (p.rho + p.mu) * x.q;
    d.r = p.gamma * x.i + p.rho * x.q - p.mu * x.r;
    return d;
}

double total_population(const StateVec& x) {
    return x.s + x.i + x.q + x.r;
}

double r0(const ModelParams& p) {
    return (p.delta / (p.mu + p.v)) * (p.alpha / p.removal_rate());
}

EquilibriumReport disease_free_equilibrium(const ModelParams& p) {
    EquilibriumReport report;
    report.kind = EquilibriumKind::DiseaseFree;
    report.point = StateVec{p.delta / (p.mu + p.v), 0.0, 0.0, 0.0};
    report.r0 = r0(p);
    report.exists = true;
    return report;
}

EquilibriumReport endemic_equilibrium(const ModelParams& p) {
    EquilibriumReport report;
    report.kind = EquilibriumKind::Endemic;
    report.r0 = r0(p);
    report.exists = report.r0 > 1.0;
    if (!report.exists) {
        return report;
    }
    StateVec e;
    e.s = p.removal_rate() / p.alpha;
    e.i = ((p.mu + p.v) / p.alpha) * (report.r0 - 1.0);
    e.q = (p.eta - p.epsilon) * e.i / (p.rho + p.mu);
    e.r = (p.gamma * e.i + p.rho * e.q) / p.mu;
    report.point = e;
    return report;
}

linalg::Matrix jacobian(const ModelParams& p, const StateVec& x) {
    linalg::Matrix j(4, 4);
    j(0, 0) = -p.alpha * x.i - p.mu - p.v;
    j(0, 1) = -p.alpha * x.s;
    j(1, 0) = p.alpha * x.i;
    j(1, 1) = p.alpha * x.s - p.removal_rate();
    j(2, 1) = p.eta - p.epsilon;
    j(2, 2) = -(p.rho + p.mu);
    j(3, 1) = p.gamma;
    j(3, 2) = p.rho;
    j(3, 3) = -p.mu;
    return j;
}

R0Sensitivity r0_gradient(const ModelParams& p) {
    const double mv = p.mu + p.v;
    const double gme = p.removal_rate();
    R0Sensitivity s;
    s.dv = p.delta * p.alpha / (mv * mv * gme);
    s.deta = p.delta * p.alpha / (mv * gme * gme);
    return s;
}

} // namespace siqr
