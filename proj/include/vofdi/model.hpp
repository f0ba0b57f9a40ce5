#pragma once

#include "vofdi/numerics.hpp"

#include <optional>
#include <string_view>

/// Closed-form decision rules of a heterogeneous firm that sources an intermediate input either
/// domestically (unit cost delta) or from its own foreign subsidiary (unit cost delta_tilde,
/// plus a fixed investment cost f_I). Productivity lambda is Pareto distributed.
namespace vofdi::model {

struct Preferences {
    double rho = 0.5;  // CES parameter, markup is 1/rho
    double A = 1.0;    // demand shifter
    void validate() const;
};

struct FirmTechnology {
    double eta = 1.0;  // input units per worker
    double f = 1.0;    // fixed production cost
    double f_I = 1.0;  // fixed cost of the foreign subsidiary
    void validate() const;
};

struct InputCosts {
    double delta = 0.0;        // domestic unit cost
    double delta_tilde = 1.0;  // subsidiary unit cost
    void validate() const;
};

/// Where the firm buys its intermediate input.
enum class Sourcing { Domestic, Subsidiary };

struct ModelParams {
    Preferences prefs;
    numerics::ParetoDist pareto{1.0, 2.0};
    InputCosts costs;
    FirmTechnology tech;

    /// Component checks plus alpha > rho / (1 - rho), which keeps aggregate input demand finite.
    void validate() const;

    ModelParams with_delta(double delta) const;
    ModelParams with_eta(double eta) const;
};

struct Cutoffs {
    double lambda_entry = 0.0;
    std::optional<double> lambda_ofdi;  // absent when no firm ever invests
};

enum class EntryOutcome { NoEntry, DomesticOnly, VerticalOFDI };

std::string_view to_string(EntryOutcome outcome);

/// (1 + eta [(1 - chi) delta + chi delta_tilde]) / lambda
double marginal_cost(const FirmTechnology& tech, const InputCosts& costs, double lambda,
                     Sourcing sourcing);

double optimal_price(double marginal_cost, const Preferences& prefs);

/// Operating profit at the optimal price net of the fixed costs of the chosen sourcing mode.
double profit(const ModelParams& params, double lambda, Sourcing sourcing);

/// Productivity at which domestic-sourcing profit is zero.
double entry_cutoff(const ModelParams& params);

/// Productivity at which both sourcing modes earn the same profit. Absent when delta <= delta_tilde
/// or eta == 0.
std::optional<double> ofdi_cutoff(const ModelParams& params);

/// Productivity at which subsidiary-sourcing profit is zero.
double ofdi_entry_cutoff(const ModelParams& params);

Cutoffs cutoffs(const ModelParams& params);

/// Profit-maximizing choice among staying out, domestic sourcing and vertical OFDI.
/// Ties go to the cheaper option (entry at zero profit, domestic at indifference).
EntryOutcome decide(const ModelParams& params, double lambda);

/// Domestic cost at which every entrant invests abroad. Requires eta > 0.
double saturation_threshold(const ModelParams& params);

/// Share of entrants that engage in vertical OFDI, in [0, 1].
double ofdi_probability(const ModelParams& params);

/// dP/d delta. Zero for delta <= delta_tilde, eta == 0, or at/above saturation.
double marginal_effect_delta(const ModelParams& params);

/// P(delta_high) - P(delta_low) for delta_low <= delta_tilde < delta_high.
double discrete_jump(const ModelParams& params, double delta_low, double delta_high);

/// d/d eta of the jump P(delta_high) when the low cost is at or below delta_tilde.
double jump_eta_sensitivity(const ModelParams& params, double delta_high);

}  // namespace vofdi::model
