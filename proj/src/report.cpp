#include "vofdi/report.hpp"

#include "vofdi/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>

namespace vofdi::report {

using nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

template <typename T>
ordered_json optional_json(const std::optional<T>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json wald_json(const std::optional<numerics::WaldTest>& w) {
    if (!w) return nullptr;
    return ordered_json{{"statistic", w->statistic}, {"df", w->df}, {"p_value", w->p_value}};
}

std::string stars(double p) {
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.1) return "*";
    return "";
}

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

ordered_json to_json(const market::Equilibrium& eq) {
    return ordered_json{{"delta_star", eq.delta_star},
                        {"quantity", eq.quantity},
                        {"regime", std::string(market::to_string(eq.regime))},
                        {"p_ofdi", eq.p_ofdi}};
}

ordered_json to_json(const market::PolicyOutcome& o) {
    return ordered_json{{"before", to_json(o.before)},
                        {"after", to_json(o.after)},
                        {"regime", std::string(market::to_string(o.regime))},
                        {"delta_p_ofdi", o.delta_p_ofdi}};
}

ordered_json to_json(const panel::PanelMetadata& meta) {
    ordered_json j;
    j["config"] = meta.config ? config::panel_to_json(*meta.config) : ordered_json(nullptr);
    j["hazard"] = meta.hazard;
    j["expected_gap"] = optional_json(meta.expected_gap);
    j["n_treated_firms"] = meta.n_treated_firms;
    j["n_control_firms"] = meta.n_control_firms;
    j["n_adopters"] = meta.n_adopters;
    j["n_preexisting"] = meta.n_preexisting;
    j["policy"] = meta.policy ? to_json(*meta.policy) : ordered_json(nullptr);
    ordered_json path = ordered_json::array();
    for (const auto& e : meta.att_path) {
        path.push_back(ordered_json{{"year", e.year}, {"att", e.att}, {"n_treated_obs", e.n_treated_obs}});
    }
    j["att_path"] = path;
    return j;
}

ordered_json to_json(const did::DidResult& r) {
    ordered_json j;
    j["control_level"] = std::string(did::to_string(r.control_level));
    j["beta2"] = r.beta2;
    j["beta2_se"] = r.beta2_se;
    j["beta2_t"] = r.beta2_t;
    j["beta2_p"] = r.beta2_p;
    j["ci_low"] = r.ci_low;
    j["ci_high"] = r.ci_high;
    j["beta1"] = optional_json(r.beta1);
    j["beta1_se"] = optional_json(r.beta1_se);
    j["beta1_partialled_out"] = r.beta1_partialled_out();
    ordered_json controls = ordered_json::array();
    for (const auto& c : r.controls) {
        controls.push_back(ordered_json{{"name", c.name}, {"estimate", c.estimate}, {"se", c.se}});
    }
    j["control_coefficients"] = controls;
    j["r_squared"] = r.r_squared;
    j["n_obs"] = r.n_obs;
    j["n_firms"] = r.n_firms;
    j["n_units"] = r.n_units;
    j["n_dropped_missing"] = r.n_dropped_missing;
    j["dropped_columns"] = r.dropped_columns;
    j["inference_df"] = r.inference_df;
    j["residual_variance"] = r.residual_variance;
    return j;
}

ordered_json to_json(const did::EventStudyResult& r) {
    ordered_json j;
    j["base_year"] = r.base_year;
    ordered_json terms = ordered_json::array();
    for (const auto& t : r.terms) {
        terms.push_back(ordered_json{{"year", t.year}, {"estimate", t.estimate}, {"se", t.se}, {"p_value", t.p_value}});
    }
    j["terms"] = terms;
    j["pre_policy_years"] = r.pre_policy_years;
    j["pre_policy_wald"] = wald_json(r.pre_policy_wald);
    j["n_obs"] = r.n_obs;
    j["n_firms"] = r.n_firms;
    j["n_dropped_missing"] = r.n_dropped_missing;
    j["dropped_columns"] = r.dropped_columns;
    j["inference_df"] = r.inference_df;
    return j;
}

ordered_json to_json(const std::vector<did::GroupYearCell>& cells) {
    ordered_json arr = ordered_json::array();
    for (const auto& c : cells) {
        arr.push_back(ordered_json{{"group", c.group}, {"year", c.year}, {"n_firms", c.n_firms}, {"p_hat", optional_json(c.p_hat)}});
    }
    return arr;
}

ordered_json to_json(const validation::ValidationSummary& s) {
    ordered_json j;
    j["reps"] = s.reps;
    j["true_effect"] = s.true_effect;
    j["mean_beta2"] = s.mean_beta2;
    j["bias"] = s.bias;
    j["rmse"] = s.rmse;
    j["sd_beta2"] = s.sd_beta2;
    j["mean_se"] = s.mean_se;
    j["coverage"] = s.coverage;
    j["significance_rate"] = s.significance_rate;
    j["wald_tested"] = s.wald_tested;
    j["wald_untestable"] = s.wald_untestable;
    j["wald_rejection_rate"] = s.wald_rejection_rate;
    j["pre_term_insignificant_rate"] = s.pre_term_insignificant_rate;
    ordered_json reps = ordered_json::array();
    for (const auto& r : s.replications) {
        reps.push_back(ordered_json{{"seed", r.seed},
                                    {"beta2", r.beta2},
                                    {"se", r.se},
                                    {"p_value", r.p_value},
                                    {"covers", r.covers},
                                    {"wald_p", optional_json(r.wald_p)}});
    }
    j["replications"] = reps;
    return j;
}

std::string build_up_table(const std::vector<did::DidResult>& columns) {
    std::vector<std::string> rows{did::kDp, did::kDpDt};
    for (const auto& c : columns) {
        for (const auto& k : c.controls) {
            if (std::find(rows.begin(), rows.end(), k.name) == rows.end()) rows.push_back(k.name);
        }
    }
    constexpr int kLabel = 16;
    constexpr int kCell = 16;
    std::ostringstream out;
    const auto cell = [&](const std::string& s) {
        out << std::string(s.size() < kCell ? kCell - s.size() : 1, ' ') << s;
    };
    out << std::string(kLabel, ' ');
    for (std::size_t i = 0; i < columns.size(); ++i) cell("[" + std::to_string(i + 1) + "]");
    out << '\n';
    for (const auto& name : rows) {
        out << name << std::string(name.size() < kLabel ? kLabel - name.size() : 1, ' ');
        std::string se_text = std::string(kLabel, ' ');
        for (const auto& c : columns) {
            std::string est, se;
            if (name == did::kDpDt) {
                est = fixed(c.beta2) + stars(c.beta2_p);
                se = "(" + fixed(c.beta2_se) + ")";
            } else if (name == did::kDp) {
                if (c.beta1) {
                    est = fixed(*c.beta1);
                    se = "(" + fixed(*c.beta1_se) + ")";
                } else {
                    est = "partialled out";
                }
            } else {
                for (const auto& k : c.controls) {
                    if (k.name == name) {
                        est = fixed(k.estimate);
                        se = "(" + fixed(k.se) + ")";
                    }
                }
            }
            cell(est);
            se_text += std::string(se.size() < kCell ? kCell - se.size() : 1, ' ') + se;
        }
        out << '\n' << se_text << '\n';
    }
    out << "R^2" << std::string(kLabel - 3, ' ');
    for (const auto& c : columns) cell(fixed(c.r_squared));
    out << "\nObservations" << std::string(kLabel - 12, ' ');
    for (const auto& c : columns) cell(std::to_string(c.n_obs));
    out << "\nFirms" << std::string(kLabel - 5, ' ');
    for (const auto& c : columns) cell(std::to_string(c.n_firms));
    out << "\nDropped (missing)";
    for (const auto& c : columns) cell(std::to_string(c.n_dropped_missing));
    out << "\n\nStandard errors in parentheses. *** p<0.01, ** p<0.05, * p<0.1.\n";
    return out.str();
}

std::string key_values(const did::DidResult& r) {
    std::ostringstream out;
    out << "control_level = " << did::to_string(r.control_level) << '\n'
        << "beta2 = " << format_double(r.beta2) << '\n'
        << "beta2_se = " << format_double(r.beta2_se) << '\n'
        << "beta2_p = " << format_double(r.beta2_p) << '\n'
        << "ci = [" << format_double(r.ci_low) << ", " << format_double(r.ci_high) << "]\n"
        << "beta1 = " << (r.beta1 ? format_double(*r.beta1) : std::string("partialled out")) << '\n'
        << "r_squared = " << format_double(r.r_squared) << '\n'
        << "n_obs = " << r.n_obs << '\n'
        << "n_firms = " << r.n_firms << '\n'
        << "n_dropped_missing = " << r.n_dropped_missing << '\n';
    out << "dropped_columns =";
    for (const auto& c : r.dropped_columns) out << ' ' << c;
    out << '\n';
    return out.str();
}

}  // namespace vofdi::report
