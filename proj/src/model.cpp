#include "vofdi/model.hpp"

#include "vofdi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vofdi::model {

void Preferences::validate() const {
    if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("rho must lie in (0, 1)");
    if (!(A > 0.0) || !std::isfinite(A)) throw InvalidArgument("demand shifter A must be positive");
}

void FirmTechnology::validate() const {
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw InvalidArgument("eta must be nonnegative");
    if (!(f > 0.0) || !std::isfinite(f)) throw InvalidArgument("fixed cost f must be positive");
    if (!(f_I > 0.0) || !std::isfinite(f_I)) throw InvalidArgument("fixed cost f_I must be positive");
}

void InputCosts::validate() const {
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidArgument("delta must be nonnegative");
    if (!(delta_tilde > 0.0) || !std::isfinite(delta_tilde)) {
        throw InvalidArgument("delta_tilde must be positive");
    }
}

void ModelParams::validate() const {
    prefs.validate();
    costs.validate();
    tech.validate();
    const double bound = prefs.rho / (1.0 - prefs.rho);
    if (!(pareto.shape() > bound)) {
        throw InvalidArgument("Pareto shape alpha=" + std::to_string(pareto.shape()) +
                              " must exceed rho/(1-rho)=" + std::to_string(bound) +
                              " for aggregate input demand to be finite");
    }
}

ModelParams ModelParams::with_delta(double delta) const {
    ModelParams out = *this;
    out.costs.delta = delta;
    return out;
}

ModelParams ModelParams::with_eta(double eta) const {
    ModelParams out = *this;
    out.tech.eta = eta;
    return out;
}

std::string_view to_string(EntryOutcome outcome) {
    switch (outcome) {
        case EntryOutcome::NoEntry: return "NoEntry";
        case EntryOutcome::DomesticOnly: return "DomesticOnly";
        case EntryOutcome::VerticalOFDI: return "VerticalOFDI";
    }
    return "?";
}

namespace {

void require_positive_lambda(double lambda) {
    if (!(lambda > 0.0)) throw InvalidArgument("productivity lambda must be positive");
}

double unit_input_cost(const FirmTechnology& tech, const InputCosts& costs, Sourcing sourcing) {
    const double cost = sourcing == Sourcing::Domestic ? costs.delta : costs.delta_tilde;
    return 1.0 + tech.eta * cost;
}

// (1-rho)^(-(1-rho)/rho) rho^(-1) A^(-(1-rho)/rho): common factor of every cutoff.
double cutoff_scale(const Preferences& prefs) {
    const double s = (1.0 - prefs.rho) / prefs.rho;
    return std::pow(1.0 - prefs.rho, -s) / prefs.rho * std::pow(prefs.A, -s);
}

bool invests_at_all(const ModelParams& p) {
    return p.costs.delta > p.costs.delta_tilde && p.tech.eta > 0.0;
}

// Unclamped closed form for P; only meaningful when invests_at_all().
double raw_probability(const ModelParams& p) {
    const double rho = p.prefs.rho;
    const double e = rho / (rho - 1.0);
    const double a = p.pareto.shape() * (1.0 - rho) / rho;
    const double ratio = (1.0 + p.tech.eta * p.costs.delta_tilde) / (1.0 + p.tech.eta * p.costs.delta);
    const double base = std::pow(ratio, e) - 1.0;
    return std::pow(base * p.tech.f / p.tech.f_I, a);
}

}  // namespace

double marginal_cost(const FirmTechnology& tech, const InputCosts& costs, double lambda,
                     Sourcing sourcing) {
    require_positive_lambda(lambda);
    return unit_input_cost(tech, costs, sourcing) / lambda;
}

double optimal_price(double marginal_cost, const Preferences& prefs) {
    if (!(marginal_cost > 0.0)) throw InvalidArgument("marginal cost must be positive");
    return marginal_cost / prefs.rho;
}

double profit(const ModelParams& params, double lambda, Sourcing sourcing) {
    params.validate();
    require_positive_lambda(lambda);
    const double rho = params.prefs.rho;
    const double gross = (1.0 - rho) * std::pow(rho, rho / (1.0 - rho)) * params.prefs.A *
                         std::pow(unit_input_cost(params.tech, params.costs, sourcing), rho / (rho - 1.0)) *
                         std::pow(lambda, rho / (1.0 - rho));
    const double fixed = params.tech.f + (sourcing == Sourcing::Subsidiary ? params.tech.f_I : 0.0);
    return gross - fixed;
}

double entry_cutoff(const ModelParams& params) {
    params.validate();
    const double s = (1.0 - params.prefs.rho) / params.prefs.rho;
    return cutoff_scale(params.prefs) * (1.0 + params.tech.eta * params.costs.delta) *
           std::pow(params.tech.f, s);
}

std::optional<double> ofdi_cutoff(const ModelParams& params) {
    params.validate();
    if (!invests_at_all(params)) return std::nullopt;
    const double rho = params.prefs.rho;
    const double s = (1.0 - rho) / rho;
    const double e = rho / (rho - 1.0);
    const double gap = std::pow(1.0 + params.tech.eta * params.costs.delta_tilde, e) -
                       std::pow(1.0 + params.tech.eta * params.costs.delta, e);
    return cutoff_scale(params.prefs) * std::pow(gap, -s) * std::pow(params.tech.f_I, s);
}

double ofdi_entry_cutoff(const ModelParams& params) {
    params.validate();
    const double s = (1.0 - params.prefs.rho) / params.prefs.rho;
    return cutoff_scale(params.prefs) * (1.0 + params.tech.eta * params.costs.delta_tilde) *
           std::pow(params.tech.f + params.tech.f_I, s);
}

Cutoffs cutoffs(const ModelParams& params) {
    return Cutoffs{entry_cutoff(params), ofdi_cutoff(params)};
}

EntryOutcome decide(const ModelParams& params, double lambda) {
    require_positive_lambda(lambda);
    const double entry = entry_cutoff(params);
    const auto star = ofdi_cutoff(params);
    if (!star) return lambda >= entry ? EntryOutcome::DomesticOnly : EntryOutcome::NoEntry;
    if (*star > entry) {
        if (lambda < entry) return EntryOutcome::NoEntry;
        return lambda <= *star ? EntryOutcome::DomesticOnly : EntryOutcome::VerticalOFDI;
    }
    // Saturated: subsidiary sourcing beats domestic sourcing wherever entry pays at all.
    return lambda >= ofdi_entry_cutoff(params) ? EntryOutcome::VerticalOFDI : EntryOutcome::NoEntry;
}

double saturation_threshold(const ModelParams& params) {
    params.validate();
    const double eta = params.tech.eta;
    if (!(eta > 0.0)) throw InvalidArgument("saturation threshold is undefined for eta = 0");
    const double s = (1.0 - params.prefs.rho) / params.prefs.rho;
    return std::pow(1.0 + params.tech.f_I / params.tech.f, s) * (1.0 + eta * params.costs.delta_tilde) / eta -
           1.0 / eta;
}

double ofdi_probability(const ModelParams& params) {
    params.validate();
    if (!invests_at_all(params)) return 0.0;
    return std::clamp(raw_probability(params), 0.0, 1.0);
}

double marginal_effect_delta(const ModelParams& params) {
    params.validate();
    if (!invests_at_all(params)) return 0.0;
    if (raw_probability(params) >= 1.0) return 0.0;
    const double rho = params.prefs.rho;
    const double alpha = params.pareto.shape();
    const double e = rho / (rho - 1.0);
    const double a = alpha * (1.0 - rho) / rho;
    const double eta = params.tech.eta;
    const double home = 1.0 + eta * params.costs.delta;
    const double abroad = 1.0 + eta * params.costs.delta_tilde;
    const double ratio = abroad / home;
    const double base = std::pow(ratio, e) - 1.0;
    return alpha * std::pow(params.tech.f / params.tech.f_I, a) * std::pow(base, a - 1.0) *
           std::pow(ratio, e - 1.0) * abroad / (home * home) * eta;
}

double discrete_jump(const ModelParams& params, double delta_low, double delta_high) {
    const double dt = params.costs.delta_tilde;
    if (delta_low > dt) throw InvalidArgument("discrete jump: delta_low must not exceed delta_tilde");
    if (!(delta_high > dt)) throw InvalidArgument("discrete jump: delta_high must exceed delta_tilde");
    return ofdi_probability(params.with_delta(delta_high)) - ofdi_probability(params.with_delta(delta_low));
}

double jump_eta_sensitivity(const ModelParams& params, double delta_high) {
    const ModelParams high = params.with_delta(delta_high);
    high.validate();
    const double dt = params.costs.delta_tilde;
    const double eta = params.tech.eta;
    if (!(delta_high > dt)) throw InvalidArgument("eta sensitivity: delta_high must exceed delta_tilde");
    if (!(eta > 0.0)) throw InvalidArgument("eta sensitivity: eta must be positive");
    if (raw_probability(high) >= 1.0) return 0.0;
    const double rho = params.prefs.rho;
    const double alpha = params.pareto.shape();
    const double e = rho / (rho - 1.0);
    const double a = alpha * (1.0 - rho) / rho;
    const double home = 1.0 + eta * delta_high;
    const double ratio = (1.0 + eta * dt) / home;
    const double base = std::pow(ratio, e) - 1.0;
    return alpha * std::pow(params.tech.f / params.tech.f_I, a) * std::pow(base, a - 1.0) *
           std::pow(ratio, e - 1.0) * (delta_high - dt) / (home * home);
}

}  // namespace vofdi::model
