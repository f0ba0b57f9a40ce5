#pragma once

#include "vofdi/did.hpp"
#include "vofdi/panel.hpp"

#include <cstdint>
#include <optional>
#include <vector>

/// Monte Carlo replications of simulate -> estimate, with per-replication seeds derived from a
/// root seed so results do not depend on the thread count.
namespace vofdi::validation {

struct Replication {
    std::uint64_t seed = 0;
    double beta2 = 0.0;
    double se = 0.0;
    double p_value = 1.0;
    bool covers = false;
    std::optional<double> wald_p;  // absent when the event-study test could not be formed
    int pre_terms = 0;
    int pre_terms_significant = 0;
};

struct ValidationSummary {
    int reps = 0;
    double true_effect = 0.0;
    double mean_beta2 = 0.0;
    double bias = 0.0;
    double rmse = 0.0;
    double sd_beta2 = 0.0;
    double mean_se = 0.0;
    double coverage = 0.0;            // share of 95% intervals containing true_effect
    double significance_rate = 0.0;   // share with p < 0.05
    int wald_tested = 0;
    int wald_untestable = 0;
    double wald_rejection_rate = 0.0;  // among tested, p < 0.05
    double pre_term_insignificant_rate = 0.0;  // pooled over all pre-policy interactions
    std::vector<Replication> replications;
};

struct ValidationOptions {
    int reps = 100;
    std::uint64_t root_seed = 1;
    int threads = 0;  // 0: hardware concurrency
    bool event_study = true;
    std::optional<int> base_year;
};

/// Replication r simulates with seed derive_seed(root_seed, r).
ValidationSummary run_validation(const panel::PanelConfig& panel, const did::DidSpec& spec,
                                 const ValidationOptions& options);

}  // namespace vofdi::validation
