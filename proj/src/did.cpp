#include "vofdi/did.hpp"

#include "vofdi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

namespace vofdi::did {

std::string_view to_string(ControlLevel level) {
    switch (level) {
        case ControlLevel::None: return "None";
        case ControlLevel::Size: return "Size";
        case ControlLevel::SizeRoa: return "SizeRoa";
        case ControlLevel::SizeRoaAge: return "SizeRoaAge";
        case ControlLevel::FullPolynomial: return "FullPolynomial";
    }
    return "?";
}

std::optional<ControlLevel> parse_control_level(std::string_view text) {
    for (const auto level : kAllLevels) {
        if (text == to_string(level)) return level;
    }
    return std::nullopt;
}

namespace {

using panel::PanelData;
using panel::PanelRow;

enum class Covariate { Size, Roa, Age };

std::optional<Covariate> parse_covariate(const std::string& name) {
    if (name == "size") return Covariate::Size;
    if (name == "roa") return Covariate::Roa;
    if (name == "age") return Covariate::Age;
    return std::nullopt;
}

std::optional<double> value_of(const PanelRow& r, Covariate c) {
    switch (c) {
        case Covariate::Size: return r.size;
        case Covariate::Roa: return r.roa;
        case Covariate::Age:
            if (r.age) return static_cast<double>(*r.age);
            return std::nullopt;
    }
    return std::nullopt;
}

std::vector<Covariate> level_covariates(ControlLevel level) {
    switch (level) {
        case ControlLevel::None: return {};
        case ControlLevel::Size: return {Covariate::Size};
        case ControlLevel::SizeRoa: return {Covariate::Size, Covariate::Roa};
        case ControlLevel::SizeRoaAge:
        case ControlLevel::FullPolynomial: return {Covariate::Size, Covariate::Roa, Covariate::Age};
    }
    return {};
}

using RowKey = std::tuple<int, int, int, std::optional<double>, std::optional<double>, std::optional<int>>;

struct Firm {
    std::vector<const PanelRow*> rows;  // by year
    std::vector<RowKey> key;
};

// Firms in an order that depends only on their data, never on labels or input row order.
std::vector<Firm> canonical_firms(const PanelData& panel) {
    std::map<std::string, std::vector<const PanelRow*>> by_id;
    for (const auto& r : panel.rows) by_id[r.firm_id].push_back(&r);
    std::vector<Firm> firms;
    firms.reserve(by_id.size());
    for (auto& [id, rows] : by_id) {
        std::sort(rows.begin(), rows.end(), [](const PanelRow* a, const PanelRow* b) { return a->year < b->year; });
        Firm f;
        f.rows = rows;
        for (const auto* r : rows) f.key.emplace_back(r->group, r->year, r->ofdi, r->size, r->roa, r->age);
        firms.push_back(std::move(f));
    }
    std::stable_sort(firms.begin(), firms.end(), [](const Firm& a, const Firm& b) { return a.key < b.key; });
    return firms;
}

std::string summary_name(const BaselineSummary& s) {
    return s.covariate + (s.kind == SummaryKind::Level ? "_level" : "_change");
}

std::optional<double> baseline_summary(const Firm& firm, Covariate c, SummaryKind kind, int post_year) {
    std::optional<double> first;
    std::optional<double> second;
    for (const auto* r : firm.rows) {
        if (r->year == post_year - 2) first = value_of(*r, c);
        if (r->year == post_year - 1) second = value_of(*r, c);
    }
    if (!first || !second) return std::nullopt;
    return kind == SummaryKind::Level ? 0.5 * (*first + *second) : *second - *first;
}

numerics::CovMode firm_cov_mode(const DidSpec& spec) {
    return spec.cov_mode ? *spec.cov_mode : numerics::CovMode{numerics::ClusterByUnit{}};
}

DidResult to_result(const numerics::RegressionFit& fit, const Design& design, ControlLevel level) {
    if (!fit.has(kDpDt)) {
        throw RegressionError("the dP x dT column was dropped; the treatment effect is not identified");
    }
    DidResult out;
    out.control_level = level;
    out.beta2 = fit.coef(kDpDt);
    out.beta2_se = fit.se(kDpDt);
    out.inference_df = fit.inference_df;
    if (out.beta2_se > 0.0) {
        out.beta2_t = out.beta2 / out.beta2_se;
        out.beta2_p = numerics::two_sided_p_value(out.beta2_t, fit.inference_df);
    } else {
        out.beta2_t = 0.0;
        out.beta2_p = out.beta2 == 0.0 ? 1.0 : 0.0;
    }
    const double crit = numerics::critical_value(0.95, fit.inference_df);
    out.ci_low = out.beta2 - crit * out.beta2_se;
    out.ci_high = out.beta2 + crit * out.beta2_se;
    if (fit.has(kDp)) {
        out.beta1 = fit.coef(kDp);
        out.beta1_se = fit.se(kDp);
    }
    for (const auto& name : fit.names) {
        if (name == kDp || name == kDpDt) continue;
        out.controls.push_back(Coefficient{name, fit.coef(name), fit.se(name)});
    }
    out.r_squared = fit.r_squared;
    out.n_obs = fit.n_obs;
    out.n_units = fit.n_units;
    out.n_firms = design.unit_ids.empty()
                      ? 0
                      : static_cast<int>(std::set<long long>(design.unit_ids.begin(), design.unit_ids.end()).size());
    out.n_dropped_missing = design.n_dropped_missing;
    out.dropped_columns = fit.dropped_columns;
    out.residual_variance = fit.residual_variance;
    return out;
}

}  // namespace

Design build_design(const PanelData& panel, const DidSpec& spec) {
    if (panel.rows.empty()) throw RegressionError("empty panel");
    const auto [min_it, max_it] = std::minmax_element(
        panel.rows.begin(), panel.rows.end(), [](const PanelRow& a, const PanelRow& b) { return a.year < b.year; });
    const int ymin = min_it->year;
    const int ymax = max_it->year;
    if (spec.post_year < ymin || spec.post_year > ymax) {
        throw InvalidArgument("post_year " + std::to_string(spec.post_year) + " is outside the panel's years " +
                              std::to_string(ymin) + "-" + std::to_string(ymax));
    }

    const auto covs = level_covariates(spec.control_level);
    std::vector<std::string> names{kDp, kDpDt};
    static const char* kNames[] = {"size", "roa", "age"};
    for (const auto c : covs) names.emplace_back(kNames[static_cast<int>(c)]);
    if (spec.control_level == ControlLevel::FullPolynomial) {
        for (const auto c : covs) names.push_back(std::string(kNames[static_cast<int>(c)]) + "^2");
        for (std::size_t a = 0; a < covs.size(); ++a) {
            for (std::size_t b = a + 1; b < covs.size(); ++b) {
                names.push_back(std::string(kNames[static_cast<int>(covs[a])]) + "*" + kNames[static_cast<int>(covs[b])]);
            }
        }
    }
    std::vector<std::pair<Covariate, SummaryKind>> summaries;
    if (spec.pretrend) {
        if (spec.pretrend->degree < 1) throw InvalidArgument("pretrend polynomial degree must be at least 1");
        for (const auto& s : spec.pretrend->summaries) {
            const auto c = parse_covariate(s.covariate);
            if (!c) throw UnknownColumn("unknown baseline covariate '" + s.covariate + "'");
            summaries.emplace_back(*c, s.kind);
            for (int k = 1; k <= spec.pretrend->degree; ++k) {
                names.push_back(summary_name(s) + "*tau^" + std::to_string(k));
            }
        }
    }

    const auto firms = canonical_firms(panel);
    const double span = ymax > ymin ? static_cast<double>(ymax - ymin) : 1.0;
    std::vector<std::vector<double>> cols(names.size());
    Design d;
    std::vector<double> y;
    for (std::size_t f = 0; f < firms.size(); ++f) {
        std::vector<double> base;
        bool base_ok = true;
        for (const auto& [c, kind] : summaries) {
            const auto v = baseline_summary(firms[f], c, kind, spec.post_year);
            if (!v) base_ok = false;
            base.push_back(v.value_or(0.0));
        }
        for (const auto* r : firms[f].rows) {
            std::vector<double> x;
            bool ok = base_ok;
            for (const auto c : covs) {
                const auto v = value_of(*r, c);
                if (!v) ok = false;
                x.push_back(v.value_or(0.0));
            }
            if (!ok) {
                ++d.n_dropped_missing;
                continue;
            }
            const double dp = spec.is_post(r->year) ? 1.0 : 0.0;
            std::size_t j = 0;
            cols[j++].push_back(dp);
            cols[j++].push_back(dp * r->group);
            for (const double v : x) cols[j++].push_back(v);
            if (spec.control_level == ControlLevel::FullPolynomial) {
                for (const double v : x) cols[j++].push_back(v * v);
                for (std::size_t a = 0; a < x.size(); ++a) {
                    for (std::size_t b = a + 1; b < x.size(); ++b) cols[j++].push_back(x[a] * x[b]);
                }
            }
            const double tau = (r->year - ymin) / span;
            for (const double b : base) {
                double power = 1.0;
                for (int k = 1; k <= spec.pretrend->degree; ++k) {
                    power *= tau;
                    cols[j++].push_back(b * power);
                }
            }
            y.push_back(r->ofdi);
            d.unit_ids.push_back(static_cast<long long>(f));
            d.years.push_back(r->year);
            d.groups.push_back(r->group);
        }
    }
    if (y.empty()) throw RegressionError("no observations left after dropping rows with missing covariates");

    const auto n = static_cast<Eigen::Index>(y.size());
    d.y = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
    d.X.resize(n, static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
        d.X.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(cols[j].data(), n);
    }
    d.names = std::move(names);
    return d;
}

DidResult estimate_did(const PanelData& panel, const DidSpec& spec) {
    const Design d = build_design(panel, spec);
    const auto fit = numerics::fe_ols(d.y, d.X, d.names, d.unit_ids, firm_cov_mode(spec), d.years);
    return to_result(fit, d, spec.control_level);
}

std::vector<DidResult> build_up(const PanelData& panel, const DidSpec& spec) {
    std::vector<DidResult> out;
    for (const auto level : kAllLevels) {
        DidSpec s = spec;
        s.control_level = level;
        out.push_back(estimate_did(panel, s));
    }
    return out;
}

EventStudyResult event_study(const PanelData& panel, const DidSpec& spec, std::optional<int> base_year) {
    const Design d = build_design(panel, spec);
    const auto [ymin_it, ymax_it] = std::minmax_element(d.years.begin(), d.years.end());
    const int ymin = *ymin_it;
    const int ymax = *ymax_it;
    const int base = base_year.value_or(ymin);
    if (base < ymin || base > ymax) {
        throw InvalidArgument("base year " + std::to_string(base) + " is outside the estimation sample");
    }

    std::vector<int> years;
    for (int y = ymin; y <= ymax; ++y) {
        if (y != base) years.push_back(y);
    }
    const auto n = d.y.size();
    const auto n_controls = d.X.cols() - 2;
    const auto n_years = static_cast<Eigen::Index>(years.size());
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, 2 * n_years + n_controls);
    std::vector<std::string> names;
    for (const int y : years) names.push_back("year_" + std::to_string(y));
    for (const int y : years) names.push_back("year_" + std::to_string(y) + "xdT");
    for (Eigen::Index j = 0; j < n_controls; ++j) names.push_back(d.names[static_cast<std::size_t>(j + 2)]);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int y = d.years[static_cast<std::size_t>(i)];
        if (y != base) {
            const auto pos = static_cast<Eigen::Index>(std::lower_bound(years.begin(), years.end(), y) - years.begin());
            X(i, pos) = 1.0;
            X(i, n_years + pos) = d.groups[static_cast<std::size_t>(i)];
        }
    }
    X.rightCols(n_controls) = d.X.rightCols(n_controls);

    const auto fit = numerics::fe_ols(d.y, X, names, d.unit_ids, firm_cov_mode(spec), d.years);
    EventStudyResult out;
    out.base_year = base;
    std::vector<std::string> pre_names;
    for (const int y : years) {
        const std::string name = "year_" + std::to_string(y) + "xdT";
        if (!fit.has(name)) continue;
        EventTerm term{y, fit.coef(name), fit.se(name), 1.0};
        if (term.se > 0.0) term.p_value = numerics::two_sided_p_value(term.estimate / term.se, fit.inference_df);
        out.terms.push_back(term);
        if (!spec.is_post(y)) pre_names.push_back(name);
    }
    // Years without any outcome change in a group give interactions that repeat earlier ones
    // exactly; only a linearly independent set of restrictions is tested.
    const auto tested = numerics::independent_restrictions(fit, pre_names);
    for (const auto& name : tested) out.pre_policy_years.push_back(std::stoi(name.substr(5, name.size() - 8)));
    if (!tested.empty()) out.pre_policy_wald = numerics::wald_joint(fit, tested);
    out.n_obs = fit.n_obs;
    out.n_firms = fit.n_units;
    out.n_dropped_missing = d.n_dropped_missing;
    out.dropped_columns = fit.dropped_columns;
    out.inference_df = fit.inference_df;
    return out;
}

std::vector<GroupYearCell> aggregate_probability(const PanelData& panel) {
    if (panel.rows.empty()) throw InvalidArgument("aggregate_probability needs a nonempty panel");
    const auto [min_it, max_it] = std::minmax_element(
        panel.rows.begin(), panel.rows.end(), [](const PanelRow& a, const PanelRow& b) { return a.year < b.year; });
    const int ymin = min_it->year;
    const int n_years = max_it->year - ymin + 1;
    std::vector<GroupYearCell> cells;
    for (int g = 0; g <= 1; ++g) {
        for (int t = 0; t < n_years; ++t) cells.push_back(GroupYearCell{g, ymin + t, 0, std::nullopt});
    }
    std::vector<int> ones(cells.size(), 0);
    for (const auto& r : panel.rows) {
        const auto k = static_cast<std::size_t>(r.group * n_years + (r.year - ymin));
        ++cells[k].n_firms;
        ones[k] += r.ofdi;
    }
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (cells[k].n_firms > 0) cells[k].p_hat = static_cast<double>(ones[k]) / cells[k].n_firms;
    }
    return cells;
}

DidResult estimate_aggregate(const PanelData& panel, const DidSpec& spec) {
    const Design d = build_design(panel, spec);
    std::map<std::pair<int, int>, std::pair<Eigen::VectorXd, int>> cells;  // (group, year) -> (sums, count)
    const auto p = d.X.cols();
    for (Eigen::Index i = 0; i < d.y.size(); ++i) {
        const auto key = std::make_pair(d.groups[static_cast<std::size_t>(i)], d.years[static_cast<std::size_t>(i)]);
        auto it = cells.find(key);
        if (it == cells.end()) it = cells.emplace(key, std::make_pair(Eigen::VectorXd::Zero(p + 1), 0)).first;
        it->second.first(0) += d.y(i);
        it->second.first.tail(p) += d.X.row(i).transpose();
        ++it->second.second;
    }
    const auto m = static_cast<Eigen::Index>(cells.size());
    Eigen::VectorXd y(m);
    Eigen::MatrixXd X(m, p);
    std::vector<long long> groups;
    std::vector<int> years;
    Eigen::Index row = 0;
    for (const auto& [key, cell] : cells) {
        const Eigen::VectorXd mean = cell.first / cell.second;
        y(row) = mean(0);
        X.row(row) = mean.tail(p).transpose();
        groups.push_back(key.first);
        years.push_back(key.second);
        ++row;
    }
    const numerics::CovMode mode = spec.cov_mode ? *spec.cov_mode : numerics::CovMode{numerics::HacBartlett{}};
    const auto fit = numerics::fe_ols(y, X, d.names, groups, mode, years);
    return to_result(fit, d, spec.control_level);
}

}  // namespace vofdi::did
