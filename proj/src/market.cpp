#include "vofdi/market.hpp"

#include "vofdi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vofdi::market {

FirmTypeMixture::FirmTypeMixture(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
    if (components_.empty()) throw InvalidArgument("firm-type mixture must have a component");
    double total = 0.0;
    for (const auto& c : components_) {
        c.tech.validate();
        if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
            throw InvalidArgument("mixture weights must be positive");
        }
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw InvalidArgument("mixture weights must sum to 1 (got " + std::to_string(total) + ")");
    }
}

FirmTypeMixture FirmTypeMixture::single(const model::FirmTechnology& tech) {
    return FirmTypeMixture({MixtureComponent{tech, 1.0}});
}

void SupplyCurve::validate() const {
    if (!(scale_banned > 0.0) || !std::isfinite(scale_banned)) {
        throw InvalidArgument("supply scale under the ban must be positive");
    }
    if (!(scale_allowed >= scale_banned) || !std::isfinite(scale_allowed)) {
        throw InvalidArgument("supply scale without the ban must be at least the banned scale");
    }
    if (!(elasticity > 0.0) || !std::isfinite(elasticity)) {
        throw InvalidArgument("supply elasticity must be positive");
    }
}

void MarketConfig::validate() const {
    prefs.validate();
    if (!(delta_tilde > 0.0) || !std::isfinite(delta_tilde)) {
        throw InvalidArgument("delta_tilde must be positive");
    }
    supply.validate();
    for (const auto& c : mixture.components()) params_for(c.tech, delta_tilde).validate();
}

model::ModelParams MarketConfig::params_for(const model::FirmTechnology& tech, double delta) const {
    return model::ModelParams{prefs, pareto, model::InputCosts{delta, delta_tilde}, tech};
}

std::string_view to_string(Regime regime) {
    switch (regime) {
        case Regime::NotClassified: return "NotClassified";
        case Regime::Regime1: return "Regime1";
        case Regime::Regime2: return "Regime2";
        case Regime::Regime3: return "Regime3";
    }
    return "?";
}

double firm_input_demand(const model::Preferences& prefs, const model::FirmTechnology& tech,
                         const model::InputCosts& costs, double lambda, model::Sourcing sourcing) {
    if (!(lambda > 0.0)) throw InvalidArgument("productivity lambda must be positive");
    const double rho = prefs.rho;
    const double cost = sourcing == model::Sourcing::Domestic ? costs.delta : costs.delta_tilde;
    return std::pow(rho, 1.0 / (1.0 - rho)) * tech.eta * prefs.A *
           std::pow(1.0 + tech.eta * cost, 1.0 / (rho - 1.0)) * std::pow(lambda, rho / (1.0 - rho));
}

namespace {

// Per-firm demand is coef * lambda^(rho/(1-rho)).
double demand_coefficient(const model::ModelParams& p) {
    const double rho = p.prefs.rho;
    return std::pow(rho, 1.0 / (1.0 - rho)) * p.tech.eta * p.prefs.A *
           std::pow(1.0 + p.tech.eta * p.costs.delta, 1.0 / (rho - 1.0));
}

// Pareto-weighted demand over [lo, hi] for entrant sets that start below lambda_m.
double demand_between(const model::ModelParams& p, double lo, double hi) {
    lo = std::max(lo, p.pareto.scale());
    if (!(hi > lo)) return 0.0;
    const double k = p.prefs.rho / (1.0 - p.prefs.rho);
    return demand_coefficient(p) * numerics::pareto_partial_moment(p.pareto, k, lo, hi);
}

void require_nonnegative_delta(double delta) {
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidArgument("delta must be nonnegative");
}

}  // namespace

double demand_m1(double delta, const MarketConfig& market, const model::FirmTechnology& tech) {
    require_nonnegative_delta(delta);
    const model::ModelParams p = market.params_for(tech, delta);
    p.validate();
    if (tech.eta == 0.0) return 0.0;
    const double entry = model::entry_cutoff(p);
    if (entry < p.pareto.scale()) return demand_between(p, entry, numerics::kInf);

    const double rho = p.prefs.rho;
    const double alpha = p.pareto.shape();
    const double a = alpha * (1.0 - rho) / rho;
    return alpha * std::pow(rho, 1.0 + alpha) * std::pow(p.pareto.scale(), alpha) /
           (alpha - rho / (1.0 - rho)) * std::pow(1.0 - rho, a - 1.0) * std::pow(p.prefs.A, a) *
           std::pow(1.0 + tech.eta * delta, -1.0 - alpha) * tech.eta * std::pow(tech.f, 1.0 - a);
}

double demand_m2(double delta, const MarketConfig& market, const model::FirmTechnology& tech) {
    require_nonnegative_delta(delta);
    if (!(delta > market.delta_tilde)) {
        throw InvalidArgument("demand_m2 is defined only for delta > delta_tilde");
    }
    const model::ModelParams p = market.params_for(tech, delta);
    p.validate();
    if (tech.eta == 0.0) return 0.0;
    const double entry = model::entry_cutoff(p);
    const double star = *model::ofdi_cutoff(p);
    if (entry < p.pareto.scale()) return demand_between(p, entry, star);

    const double rho = p.prefs.rho;
    const double e = rho / (rho - 1.0);
    const double a = p.pareto.shape() * (1.0 - rho) / rho;
    const double ratio = (1.0 + tech.eta * market.delta_tilde) / (1.0 + tech.eta * delta);
    const double braces =
        1.0 - std::pow(std::pow(ratio, e) - 1.0, a - 1.0) * std::pow(tech.f_I / tech.f, 1.0 - a);
    return std::max(0.0, demand_m1(delta, market, tech) * braces);
}

double aggregate_demand(double delta, const MarketConfig& market) {
    require_nonnegative_delta(delta);
    const bool kinked = delta > market.delta_tilde;
    double total = 0.0;
    for (const auto& c : market.mixture.components()) {
        total += c.weight * (kinked ? demand_m2(delta, market, c.tech) : demand_m1(delta, market, c.tech));
    }
    return total;
}

double supply(double delta, const SupplyCurve& curve, bool ban_active) {
    require_nonnegative_delta(delta);
    curve.validate();
    const double s = ban_active ? curve.scale_banned : curve.scale_allowed;
    return s * std::pow(delta, curve.elasticity);
}

double mixture_ofdi_probability(double delta, const MarketConfig& market) {
    double total = 0.0;
    for (const auto& c : market.mixture.components()) {
        total += c.weight * model::ofdi_probability(market.params_for(c.tech, delta));
    }
    return std::clamp(total, 0.0, 1.0);
}

Equilibrium solve_equilibrium(const MarketConfig& market, bool ban_active) {
    market.validate();
    const auto excess = [&](double delta) {
        return aggregate_demand(delta, market) - supply(delta, market.supply, ban_active);
    };
    constexpr double kLow = 1e-8;
    constexpr int kMaxExpansions = 8;
    double hi = market.delta_tilde * 10.0;
    if (!(excess(kLow) > 0.0)) {
        throw SolverError("no market-clearing cost: supply already exceeds demand at delta=1e-8");
    }
    int expansions = 0;
    while (excess(hi) > 0.0) {
        if (expansions == kMaxExpansions) {
            throw SolverError("no market-clearing cost below delta=" + std::to_string(hi));
        }
        hi *= 10.0;
        ++expansions;
    }
    Equilibrium eq;
    eq.delta_star = numerics::bisect(excess, kLow, hi);
    eq.quantity = supply(eq.delta_star, market.supply, ban_active);
    eq.p_ofdi = mixture_ofdi_probability(eq.delta_star, market);
    return eq;
}

PolicyOutcome policy_experiment(const MarketConfig& market) {
    PolicyOutcome out;
    out.before = solve_equilibrium(market, false);
    out.after = solve_equilibrium(market, true);
    const double dt = market.delta_tilde;
    if (out.before.delta_star > dt) {
        out.regime = Regime::Regime3;
    } else if (out.after.delta_star > dt) {
        out.regime = Regime::Regime2;
    } else {
        out.regime = Regime::Regime1;
    }
    out.before.regime = out.regime;
    out.after.regime = out.regime;
    out.delta_p_ofdi = out.after.p_ofdi - out.before.p_ofdi;
    return out;
}

double supply_scale_for(const MarketConfig& market, double delta, double elasticity) {
    if (!(delta > 0.0)) throw InvalidArgument("target delta must be positive");
    const double demand = aggregate_demand(delta, market);
    if (!(demand > 0.0)) throw InvalidArgument("no demand at the target delta");
    return demand / std::pow(delta, elasticity);
}

MarketConfig demo_market(DemoScenario scenario) {
    MarketConfig m;
    m.prefs = model::Preferences{0.5, 1.0};
    m.pareto = numerics::ParetoDist(1.0, 2.0);
    m.delta_tilde = 2.0;
    m.mixture = FirmTypeMixture::single(model::FirmTechnology{1.0, 1.0, 1.0});
    const auto scale = [&](double delta) { return supply_scale_for(m, delta, 1.0); };
    switch (scenario) {
        case DemoScenario::Regime1: m.supply = SupplyCurve{scale(1.0), scale(1.5), 1.0}; break;
        case DemoScenario::Regime2: m.supply = SupplyCurve{scale(1.5), scale(4.5), 1.0}; break;
        case DemoScenario::Regime3: m.supply = SupplyCurve{scale(3.0), scale(4.0), 1.0}; break;
        // Supply so thin that both equilibria sit on the saturation point to solver precision.
        case DemoScenario::Saturated: m.supply = SupplyCurve{1e-24, 1e-26, 1.0}; break;
    }
    return m;
}

}  // namespace vofdi::market
