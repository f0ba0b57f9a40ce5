#pragma once

#include "vofdi/market.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

/// Synthetic unbalanced firm-year panels with a cumulative OFDI outcome, and their CSV form.
namespace vofdi::panel {

enum class DgpMode { ReducedForm, Structural };

std::string_view to_string(DgpMode mode);

/// Firm-year moments the simulated covariates are matched to, plus the shape of their
/// time-series processes. Size and ROA are mean + firm effect + stationary AR(1); the firm
/// effect carries `*_firm_share` of the total variance.
struct CovariateCalibration {
    double size_mean = -0.7191;
    double size_sd = 1.2161;
    double roa_mean = 0.0394;
    double roa_sd = 0.0358;
    double age_mean = 30.3683;
    double age_sd = 21.6620;
    double size_firm_share = 0.8;
    double size_ar = 0.7;
    double roa_firm_share = 0.5;
    double roa_ar = 0.5;
    void validate() const;
};

struct PanelConfig {
    int n_treated = 20;
    int n_control = 22;
    int start_year = 2000;
    int end_year = 2023;
    int policy_year = 2017;
    bool include_policy_year = true;  // adoption can start in the policy year itself
    DgpMode mode = DgpMode::ReducedForm;

    double true_effect = 0.1639;            // ReducedForm target gap
    std::optional<double> per_year_hazard;  // overrides the calibration when set
    double background_hazard = 0.0;         // adoption hazard shared by both groups in every year
    double confounding = 0.0;               // log-hazard slope on the standardized size effect

    CovariateCalibration covariates;
    double attrition_rate = 0.3;  // probability that each end of a firm's span is censored
    int max_censor_years = 8;
    double roa_missing_rate = 0.05;   // per row
    double age_missing_rate = 0.025;  // per firm

    std::optional<market::MarketConfig> market;  // required in Structural mode
    std::uint64_t seed = 20170101;

    void validate() const;
    int first_post_year() const { return include_policy_year ? policy_year : policy_year + 1; }
};

struct PanelRow {
    std::string firm_id;
    int group = 0;  // 1 = treated
    int year = 0;
    int ofdi = 0;   // cumulative indicator
    std::optional<double> size;
    std::optional<double> roa;
    std::optional<int> age;

    bool operator==(const PanelRow&) const = default;
};

struct YearEffect {
    int year = 0;
    double att = 0.0;  // mean of (ofdi - untreated ofdi) over observed treated firms
    int n_treated_obs = 0;
};

/// Realized truth behind a simulated panel. Not part of the CSV.
struct PanelMetadata {
    std::optional<PanelConfig> config;
    double hazard = 0.0;
    std::optional<double> expected_gap;  // ReducedForm: expected post-period treated-control gap
    std::vector<YearEffect> att_path;
    int n_treated_firms = 0;
    int n_control_firms = 0;
    int n_adopters = 0;       // treated firms switched to OFDI by the policy
    int n_preexisting = 0;    // Structural: treated firms already invested before the ban
    std::optional<market::PolicyOutcome> policy;
};

struct PanelData {
    std::vector<PanelRow> rows;
    PanelMetadata metadata;

    /// Compares rows only.
    bool operator==(const PanelData& other) const { return rows == other.rows; }
};

/// Per-year treated adoption hazard whose expected post-period gap equals `config.true_effect`.
/// Throws InvalidArgument when the target is negative or cannot be reached.
double calibrate_hazard(const PanelConfig& config);

/// Expected post-period treated-control gap of the reduced-form process at hazard `h`,
/// weighted by the probability that each post year is observed.
double expected_post_gap(const PanelConfig& config, double h);

/// Probability that a firm is observed in `year` under the censoring scheme.
double observation_probability(const PanelConfig& config, int year);

PanelData simulate_panel(const PanelConfig& config);

/// Panel-level checks shared by import and simulation: (firm_id, year) unique, group constant
/// per firm, contiguous years, absorbing ofdi, age stepping by one.
void validate_panel(const PanelData& panel);

void write_csv(const PanelData& panel, std::ostream& out);
PanelData read_csv(std::istream& in);

void export_csv(const PanelData& panel, const std::filesystem::path& path);
PanelData import_csv(const std::filesystem::path& path);

inline constexpr const char* kCsvHeader = "firm_id,group,year,ofdi,size,roa,age";

}  // namespace vofdi::panel
