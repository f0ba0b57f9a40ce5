#pragma once

#include "vofdi/numerics.hpp"
#include "vofdi/panel.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

/// Linear-probability difference-in-differences on a firm-year panel: firm-level fixed effects
/// with build-up control sets, an event study of year-by-treatment interactions, and the
/// group-year aggregate estimator.
namespace vofdi::did {

/// Control sets of increasing richness. FullPolynomial adds the squares and pairwise products
/// of size, roa and age.
enum class ControlLevel { None, Size, SizeRoa, SizeRoaAge, FullPolynomial };

inline constexpr ControlLevel kAllLevels[] = {ControlLevel::None, ControlLevel::Size, ControlLevel::SizeRoa,
                                              ControlLevel::SizeRoaAge, ControlLevel::FullPolynomial};

std::string_view to_string(ControlLevel level);
std::optional<ControlLevel> parse_control_level(std::string_view text);

enum class SummaryKind { Level, Change };

/// A firm-constant summary of a covariate over the two years before `post_year`: their mean
/// (Level) or their difference (Change).
struct BaselineSummary {
    std::string covariate;  // size, roa or age
    SummaryKind kind = SummaryKind::Level;
};

/// Each summary is interacted with tau^1..tau^degree, tau = calendar time rescaled to [0, 1].
struct PretrendControls {
    std::vector<BaselineSummary> summaries;
    int degree = 4;
};

struct DidSpec {
    int post_year = 2017;
    bool include_policy_year = true;
    ControlLevel control_level = ControlLevel::None;
    std::optional<PretrendControls> pretrend;
    std::optional<numerics::CovMode> cov_mode;  // default: cluster by firm (HAC for the aggregate model)

    bool is_post(int year) const { return include_policy_year ? year >= post_year : year > post_year; }
};

inline const std::string kDp = "dP";
inline const std::string kDpDt = "dPxdT";

/// Estimation sample in canonical order: firms sorted by a label-free key (group, then their
/// year-ordered row contents), rows by year within firm. Unit ids are positions in that order.
struct Design {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    std::vector<std::string> names;
    std::vector<long long> unit_ids;
    std::vector<int> years;
    std::vector<int> groups;
    int n_dropped_missing = 0;
};

Design build_design(const panel::PanelData& panel, const DidSpec& spec);

struct Coefficient {
    std::string name;
    double estimate = 0.0;
    double se = 0.0;
};

struct DidResult {
    ControlLevel control_level = ControlLevel::None;
    double beta2 = 0.0;
    double beta2_se = 0.0;  // zero only when the outcome has no within variation
    double beta2_t = 0.0;
    double beta2_p = 1.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::optional<double> beta1;  // absent when dP is partialled out
    std::optional<double> beta1_se;
    std::vector<Coefficient> controls;
    double r_squared = 0.0;
    int n_obs = 0;
    int n_firms = 0;
    int n_units = 0;  // fixed-effect units: firms, or groups for the aggregate model
    int n_dropped_missing = 0;
    std::vector<std::string> dropped_columns;
    double inference_df = 0.0;
    double residual_variance = 0.0;

    bool beta1_partialled_out() const { return !beta1.has_value(); }
};

DidResult estimate_did(const panel::PanelData& panel, const DidSpec& spec);

/// estimate_did at every control level, other settings taken from `spec`.
std::vector<DidResult> build_up(const panel::PanelData& panel, const DidSpec& spec);

struct EventTerm {
    int year = 0;
    double estimate = 0.0;
    double se = 0.0;
    double p_value = 1.0;
};

struct EventStudyResult {
    int base_year = 0;
    std::vector<EventTerm> terms;  // retained year x treatment interactions, base year excluded
    std::vector<int> pre_policy_years;  // years entering the joint test (a linearly independent subset)
    std::optional<numerics::WaldTest> pre_policy_wald;  // absent when no pre-policy term survives
    int n_obs = 0;
    int n_firms = 0;
    int n_dropped_missing = 0;
    std::vector<std::string> dropped_columns;
    double inference_df = 0.0;
};

/// Regression of the outcome on firm effects, year effects and year x treatment interactions for
/// every year but `base_year` (default: first year in the panel), plus the controls in `spec`.
EventStudyResult event_study(const panel::PanelData& panel, const DidSpec& spec,
                             std::optional<int> base_year = std::nullopt);

struct GroupYearCell {
    int group = 0;
    int year = 0;
    int n_firms = 0;
    std::optional<double> p_hat;
};

/// Share of firms with ofdi = 1 for each group and year of the panel's range.
std::vector<GroupYearCell> aggregate_probability(const panel::PanelData& panel);

/// Group-year means of the outcome and of every design column (over the firm-level estimation
/// sample) regressed with group fixed effects.
DidResult estimate_aggregate(const panel::PanelData& panel, const DidSpec& spec);

}  // namespace vofdi::did
