#pragma once

#include "vofdi/model.hpp"
#include "vofdi/numerics.hpp"

#include <string_view>
#include <vector>

/// Upstream market for the domestic intermediate input: kinked aggregate demand built from the
/// firm model, an isoelastic supply that a raw-material import ban scales down, and the
/// market-clearing unit cost before and after the ban.
namespace vofdi::market {

struct MixtureComponent {
    model::FirmTechnology tech;
    double weight = 1.0;
};

/// Finite distribution of firm technologies; aggregate demand is the weighted sum over components.
class FirmTypeMixture {
public:
    explicit FirmTypeMixture(std::vector<MixtureComponent> components);
    static FirmTypeMixture single(const model::FirmTechnology& tech);

    const std::vector<MixtureComponent>& components() const noexcept { return components_; }

private:
    std::vector<MixtureComponent> components_;
};

/// M(delta, policy) = s * delta^gamma with s = scale_banned under the ban.
struct SupplyCurve {
    double scale_allowed = 1.0;
    double scale_banned = 1.0;
    double elasticity = 1.0;
    void validate() const;
};

struct MarketConfig {
    model::Preferences prefs;
    numerics::ParetoDist pareto{1.0, 2.0};
    double delta_tilde = 2.0;
    FirmTypeMixture mixture = FirmTypeMixture::single(model::FirmTechnology{});
    SupplyCurve supply;

    void validate() const;
    model::ModelParams params_for(const model::FirmTechnology& tech, double delta) const;
};

enum class Regime { NotClassified, Regime1, Regime2, Regime3 };

std::string_view to_string(Regime regime);

struct Equilibrium {
    double delta_star = 0.0;
    double quantity = 0.0;
    Regime regime = Regime::NotClassified;
    double p_ofdi = 0.0;  // mixture-weighted OFDI probability at delta_star
};

struct PolicyOutcome {
    Equilibrium before;
    Equilibrium after;
    Regime regime = Regime::NotClassified;
    double delta_p_ofdi = 0.0;
};

/// Optimal input use of one firm: eta * q / lambda at the optimal price.
double firm_input_demand(const model::Preferences& prefs, const model::FirmTechnology& tech,
                         const model::InputCosts& costs, double lambda, model::Sourcing sourcing);

/// Demand of a unit mass of potential entrants of one technology when every entrant sources
/// domestically (delta <= delta_tilde branch).
double demand_m1(double delta, const MarketConfig& market, const model::FirmTechnology& tech);

/// Domestic demand when delta > delta_tilde: only entrants in [lambda_entry, lambda*] buy at home.
double demand_m2(double delta, const MarketConfig& market, const model::FirmTechnology& tech);

double aggregate_demand(double delta, const MarketConfig& market);

double supply(double delta, const SupplyCurve& curve, bool ban_active);

double mixture_ofdi_probability(double delta, const MarketConfig& market);

Equilibrium solve_equilibrium(const MarketConfig& market, bool ban_active);

/// Solves without and with the ban and classifies the move relative to delta_tilde.
PolicyOutcome policy_experiment(const MarketConfig& market);

/// Supply scale that clears the market exactly at `delta` for the given elasticity.
double supply_scale_for(const MarketConfig& market, double delta, double elasticity);

enum class DemoScenario { Regime1, Regime2, Regime3, Saturated };

/// Demonstration markets on the reference firm (rho = 0.5, alpha = 2, A = 1, lambda_m = 1,
/// delta_tilde = 2, eta = 1, f = f_I = 1, unit supply elasticity) with supply scales placed so the
/// equilibrium moves 1 -> 1.5 (Regime1), 1.5 -> 4.5 (Regime2), 3 -> 4 (Regime3), or sits at
/// the saturation point both before and after (Saturated).
MarketConfig demo_market(DemoScenario scenario);

}  // namespace vofdi::market
