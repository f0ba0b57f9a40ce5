#include "vofdi/panel.hpp"

#include "vofdi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace vofdi::panel {

std::string_view to_string(DgpMode mode) {
    switch (mode) {
        case DgpMode::ReducedForm: return "ReducedForm";
        case DgpMode::Structural: return "Structural";
    }
    return "?";
}

namespace {

void require_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(name) + " must be positive");
}

}  // namespace

void CovariateCalibration::validate() const {
    require_positive(size_sd, "size_sd");
    require_positive(roa_sd, "roa_sd");
    require_positive(age_mean, "age_mean");
    require_positive(age_sd, "age_sd");
    if (!std::isfinite(size_mean) || !std::isfinite(roa_mean)) {
        throw InvalidArgument("covariate means must be finite");
    }
    require_probability(size_firm_share, "size_firm_share");
    require_probability(roa_firm_share, "roa_firm_share");
    if (!(std::abs(size_ar) < 1.0) || !(std::abs(roa_ar) < 1.0)) {
        throw InvalidArgument("AR coefficients must lie in (-1, 1)");
    }
}

void PanelConfig::validate() const {
    if (n_treated <= 0 || n_control <= 0) throw InvalidArgument("group sizes must be positive");
    if (!(start_year < policy_year && policy_year < end_year)) {
        throw InvalidArgument("policy_year must lie strictly inside the year range");
    }
    if (first_post_year() > end_year) throw InvalidArgument("no post-policy years");
    if (!std::isfinite(true_effect)) throw InvalidArgument("true_effect must be finite");
    if (per_year_hazard) require_probability(*per_year_hazard, "per_year_hazard");
    require_probability(background_hazard, "background_hazard");
    if (background_hazard >= 1.0) throw InvalidArgument("background_hazard must be below 1");
    if (!std::isfinite(confounding)) throw InvalidArgument("confounding must be finite");
    covariates.validate();
    require_probability(attrition_rate, "attrition_rate");
    require_probability(roa_missing_rate, "roa_missing_rate");
    require_probability(age_missing_rate, "age_missing_rate");
    if (max_censor_years < 1) throw InvalidArgument("max_censor_years must be at least 1");
    if (2 * max_censor_years >= end_year - start_year + 1) {
        throw InvalidArgument("max_censor_years leaves no observed years for some firms");
    }
    if (mode == DgpMode::Structural) {
        if (!market) throw InvalidArgument("Structural mode needs a market block");
        market->validate();
    }
}

double observation_probability(const PanelConfig& config, int year) {
    if (year < config.start_year || year > config.end_year) return 0.0;
    const double r = config.attrition_rate;
    const double m = config.max_censor_years;
    const auto kept = [&](int room) { return 1.0 - r + r * std::min(m, static_cast<double>(room)) / m; };
    return kept(year - config.start_year) * kept(config.end_year - year);
}

double expected_post_gap(const PanelConfig& config, double h) {
    double num = 0.0;
    double den = 0.0;
    for (int y = config.first_post_year(); y <= config.end_year; ++y) {
        const double w = observation_probability(config, y);
        const int k = y - config.first_post_year() + 1;
        const double survive = std::pow(1.0 - config.background_hazard, y - config.start_year + 1);
        num += w * survive * (1.0 - std::pow(1.0 - h, k));
        den += w;
    }
    return num / den;
}

double calibrate_hazard(const PanelConfig& config) {
    if (config.per_year_hazard) return *config.per_year_hazard;
    const double target = config.true_effect;
    if (target < 0.0) throw InvalidArgument("true_effect must be nonnegative (adoption is absorbing)");
    if (target == 0.0) return 0.0;
    const double ceiling = expected_post_gap(config, 1.0);
    if (target > ceiling) {
        throw InvalidArgument("true_effect " + std::to_string(target) +
                              " is unreachable: the largest expected post-period gap is " +
                              std::to_string(ceiling));
    }
    if (target == ceiling) return 1.0;
    return numerics::bisect([&](double h) { return expected_post_gap(config, h) - target; }, 0.0, 1.0);
}

namespace {

using numerics::Rng;
using numerics::uniform_open;

constexpr int kNever = std::numeric_limits<int>::max();

struct AgeGamma {
    double shape = 1.0;
    double scale = 1.0;
};

// Age in the first sample year is Gamma distributed; its moments are the firm-year targets net
// of the within-firm year offsets and the rounding to whole years.
AgeGamma age_gamma(const PanelConfig& config) {
    double w = 0.0, m = 0.0, m2 = 0.0;
    for (int y = config.start_year; y <= config.end_year; ++y) {
        const double p = observation_probability(config, y);
        const double off = y - config.start_year;
        w += p;
        m += p * off;
        m2 += p * off * off;
    }
    m /= w;
    const double v_off = m2 / w - m * m;
    const double mean0 = config.covariates.age_mean - m;
    const double var0 = config.covariates.age_sd * config.covariates.age_sd - v_off - 1.0 / 12.0;
    if (!(mean0 > 0.0) || !(var0 > 0.0)) {
        throw InvalidArgument("age calibration is inconsistent with the panel length");
    }
    return AgeGamma{mean0 * mean0 / var0, var0 / mean0};
}

std::vector<double> ar1_path(double mean, double sd, double firm_share, double phi, int n, Rng& rng,
                             double* firm_effect_z) {
    std::normal_distribution<double> z;
    const double z_firm = z(rng);
    if (firm_effect_z) *firm_effect_z = z_firm;
    const double firm = sd * std::sqrt(firm_share) * z_firm;
    const double inner_sd = sd * std::sqrt(1.0 - firm_share);
    const double innovation_sd = inner_sd * std::sqrt(1.0 - phi * phi);
    std::vector<double> out(static_cast<std::size_t>(n));
    double u = inner_sd * z(rng);
    for (int t = 0; t < n; ++t) {
        if (t > 0) u = phi * u + innovation_sd * z(rng);
        out[static_cast<std::size_t>(t)] = mean + firm + u;
    }
    return out;
}

int censored_years(const PanelConfig& config, Rng& rng) {
    const bool censor = uniform_open(rng) < config.attrition_rate;
    const double u = uniform_open(rng);
    if (!censor) return 0;
    return 1 + std::min(config.max_censor_years - 1, static_cast<int>(u * config.max_censor_years));
}

int first_hit_year(int from, int to, double hazard, Rng& rng) {
    int hit = kNever;
    for (int y = from; y <= to; ++y) {
        const double u = uniform_open(rng);
        if (hit == kNever && u < hazard) hit = y;
    }
    return hit;
}

std::string firm_label(char prefix, int index) {
    std::string digits = std::to_string(index + 1);
    if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
    return std::string(1, prefix) + digits;
}

const model::FirmTechnology& draw_component(const market::FirmTypeMixture& mixture, Rng& rng) {
    const double u = uniform_open(rng);
    double cum = 0.0;
    for (const auto& c : mixture.components()) {
        cum += c.weight;
        if (u < cum) return c.tech;
    }
    return mixture.components().back().tech;
}

}  // namespace

PanelData simulate_panel(const PanelConfig& config) {
    config.validate();
    const int n_years = config.end_year - config.start_year + 1;
    const int first_post = config.first_post_year();
    const int n_post = config.end_year - first_post + 1;
    const AgeGamma gamma = age_gamma(config);
    const auto& cov = config.covariates;

    PanelData panel;
    PanelMetadata& meta = panel.metadata;
    meta.config = config;
    meta.n_treated_firms = config.n_treated;
    meta.n_control_firms = config.n_control;

    double hazard = 0.0;
    if (config.mode == DgpMode::ReducedForm) {
        hazard = calibrate_hazard(config);
        meta.expected_gap = expected_post_gap(config, hazard);
    } else {
        meta.policy = market::policy_experiment(*config.market);
    }
    meta.hazard = hazard;

    std::vector<double> att_sum(static_cast<std::size_t>(n_years), 0.0);
    std::vector<int> att_n(static_cast<std::size_t>(n_years), 0);

    const int n_firms = config.n_treated + config.n_control;
    for (int i = 0; i < n_firms; ++i) {
        const bool treated = i < config.n_treated;
        Rng rng(numerics::derive_seed(config.seed, static_cast<std::uint64_t>(i)));

        double size_z = 0.0;
        const auto size = ar1_path(cov.size_mean, cov.size_sd, cov.size_firm_share, cov.size_ar, n_years,
                                   rng, &size_z);
        const auto roa = ar1_path(cov.roa_mean, cov.roa_sd, cov.roa_firm_share, cov.roa_ar, n_years, rng,
                                  nullptr);
        std::gamma_distribution<double> age_dist(gamma.shape, gamma.scale);
        const int age0 = static_cast<int>(std::floor(age_dist(rng) + 0.5));
        const bool age_missing = uniform_open(rng) < config.age_missing_rate;
        std::vector<bool> roa_missing(static_cast<std::size_t>(n_years));
        for (int t = 0; t < n_years; ++t) roa_missing[static_cast<std::size_t>(t)] = uniform_open(rng) < config.roa_missing_rate;
        const int lead = censored_years(config, rng);
        const int trail = censored_years(config, rng);

        const int background_year = first_hit_year(config.start_year, config.end_year, config.background_hazard, rng);
        int policy_year = kNever;
        bool preexisting = false;
        if (treated && config.mode == DgpMode::ReducedForm) {
            const double h = std::clamp(hazard * std::exp(config.confounding * size_z), 0.0, 1.0);
            policy_year = first_hit_year(first_post, config.end_year, h, rng);
        } else if (treated) {
            const auto& m = *config.market;
            const auto& tech = draw_component(m.mixture, rng);
            const auto after = m.params_for(tech, meta.policy->after.delta_star);
            const auto before = m.params_for(tech, meta.policy->before.delta_star);
            const double threshold = std::min(model::entry_cutoff(after), model::ofdi_entry_cutoff(after));
            const double lambda = numerics::pareto_sample_above(m.pareto, threshold, rng);
            const int offset = std::min(n_post - 1, static_cast<int>(uniform_open(rng) * n_post));
            preexisting = model::decide(before, lambda) == model::EntryOutcome::VerticalOFDI;
            if (preexisting) {
                ++meta.n_preexisting;
            } else if (model::decide(after, lambda) == model::EntryOutcome::VerticalOFDI) {
                policy_year = first_post + offset;
            }
        }
        if (policy_year != kNever && policy_year < background_year) ++meta.n_adopters;

        const char prefix = treated ? 'T' : 'C';
        const int index = treated ? i : i - config.n_treated;
        const std::string id = firm_label(prefix, index);
        for (int t = lead; t < n_years - trail; ++t) {
            const int year = config.start_year + t;
            const bool untreated = preexisting || year >= background_year;
            PanelRow row;
            row.firm_id = id;
            row.group = treated ? 1 : 0;
            row.year = year;
            row.ofdi = (untreated || year >= policy_year) ? 1 : 0;
            row.size = size[static_cast<std::size_t>(t)];
            if (!roa_missing[static_cast<std::size_t>(t)]) row.roa = roa[static_cast<std::size_t>(t)];
            if (!age_missing) row.age = std::max(0, age0) + t;
            if (treated) {
                att_sum[static_cast<std::size_t>(t)] += row.ofdi - (untreated ? 1 : 0);
                ++att_n[static_cast<std::size_t>(t)];
            }
            panel.rows.push_back(std::move(row));
        }
    }

    for (int t = 0; t < n_years; ++t) {
        const auto k = static_cast<std::size_t>(t);
        meta.att_path.push_back(YearEffect{config.start_year + t, att_n[k] > 0 ? att_sum[k] / att_n[k] : 0.0, att_n[k]});
    }
    return panel;
}

}  // namespace vofdi::panel
