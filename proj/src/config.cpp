#include "vofdi/config.hpp"

#include "vofdi/errors.hpp"

#include <fstream>
#include <set>

namespace vofdi::config {

using nlohmann::json;
using nlohmann::ordered_json;

void Figure4Config::validate() const {
    if (etas.empty()) throw InvalidArgument("figure4.etas must not be empty");
    for (const double eta : etas) {
        if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("figure4.etas must be positive");
    }
    if (!(delta_min >= 0.0) || !(delta_max > delta_min) || !std::isfinite(delta_max)) {
        throw InvalidArgument("figure4 needs 0 <= delta_min < delta_max");
    }
    if (points < 2) throw InvalidArgument("figure4.points must be at least 2");
    params.with_delta(delta_min).validate();
}

void ValidateConfig::validate() const {
    if (reps < 1) throw InvalidArgument("validate.reps must be at least 1");
    if (threads < 0) throw InvalidArgument("validate.threads must be nonnegative");
}

namespace {

// Reads typed keys from one JSON object and rejects keys nobody asked for.
class Block {
public:
    Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw InvalidArgument(path_ + " must be a JSON object");
    }

    ~Block() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw InvalidArgument("unknown key " + path_ + "." + key);
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string path(const std::string& key) const { return path_ + "." + key; }

    template <typename T>
    void read(const std::string& key, T& out) {
        if (!has(key)) return;
        out = as<T>(j_.at(key), path(key));
    }

    template <typename T>
    void read_optional(const std::string& key, std::optional<T>& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        if (j_.at(key).is_null()) {
            out.reset();
            return;
        }
        out = as<T>(j_.at(key), path(key));
    }

    template <typename T>
    static T as(const json& v, const std::string& where) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw InvalidArgument(where + " must be a boolean");
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            if (!v.is_array()) throw InvalidArgument(where + " must be an array of numbers");
            for (const auto& e : v) {
                if (!e.is_number()) throw InvalidArgument(where + " must be an array of numbers");
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw InvalidArgument(where + " must be a string");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw InvalidArgument(where + " must be an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_integer() && !v.is_number_unsigned()) {
                    throw InvalidArgument(where + " must be nonnegative");
                }
            }
        } else {
            if (!v.is_number()) throw InvalidArgument(where + " must be a number");
        }
        return v.get<T>();
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

market::DemoScenario parse_demo(const std::string& name, const std::string& where) {
    if (name == "Regime1") return market::DemoScenario::Regime1;
    if (name == "Regime2") return market::DemoScenario::Regime2;
    if (name == "Regime3") return market::DemoScenario::Regime3;
    if (name == "Saturated") return market::DemoScenario::Saturated;
    throw InvalidArgument(where + ": unknown demo market '" + name + "'");
}

numerics::CovMode parse_cov_mode(const json& j, const std::string& where) {
    Block b(j, where);
    std::string type;
    if (!b.has("type")) throw InvalidArgument(where + ".type is required");
    b.read("type", type);
    if (type == "cluster") return numerics::ClusterByUnit{};
    if (type == "hac") {
        numerics::HacBartlett hac;
        b.read_optional("bandwidth", hac.bandwidth);
        if (hac.bandwidth && *hac.bandwidth < 0) throw InvalidArgument(where + ".bandwidth must be nonnegative");
        return hac;
    }
    throw InvalidArgument(where + ".type must be 'cluster' or 'hac'");
}

ordered_json cov_mode_to_json(const std::optional<numerics::CovMode>& mode) {
    if (!mode) return nullptr;
    if (std::holds_alternative<numerics::ClusterByUnit>(*mode)) return ordered_json{{"type", "cluster"}};
    const auto& hac = std::get<numerics::HacBartlett>(*mode);
    ordered_json j{{"type", "hac"}};
    j["bandwidth"] = hac.bandwidth ? ordered_json(*hac.bandwidth) : ordered_json(nullptr);
    return j;
}

void parse_model(const json& j, Figure4Config& fig) {
    Block b(j, "model");
    auto& p = fig.params;
    b.read("rho", p.prefs.rho);
    b.read("A", p.prefs.A);
    double scale = p.pareto.scale();
    double shape = p.pareto.shape();
    b.read("lambda_m", scale);
    b.read("alpha", shape);
    p.pareto = numerics::ParetoDist(scale, shape);
    b.read("delta_tilde", p.costs.delta_tilde);
    b.read("f", p.tech.f);
    b.read("f_I", p.tech.f_I);
}

void parse_figure4(const json& j, Figure4Config& fig) {
    Block b(j, "figure4");
    b.read("etas", fig.etas);
    b.read("delta_min", fig.delta_min);
    b.read("delta_max", fig.delta_max);
    b.read("points", fig.points);
}

market::MarketConfig parse_market(const json& j, const market::MarketConfig& defaults) {
    Block b(j, "market");
    market::MarketConfig m = defaults;
    if (b.has("demo")) {
        std::string name;
        b.read("demo", name);
        m = market::demo_market(parse_demo(name, b.path("demo")));
    }
    b.read("rho", m.prefs.rho);
    b.read("A", m.prefs.A);
    double scale = m.pareto.scale();
    double shape = m.pareto.shape();
    b.read("lambda_m", scale);
    b.read("alpha", shape);
    m.pareto = numerics::ParetoDist(scale, shape);
    b.read("delta_tilde", m.delta_tilde);
    if (b.has("mixture")) {
        const json& arr = b.raw("mixture");
        if (!arr.is_array()) throw InvalidArgument("market.mixture must be an array");
        std::vector<market::MixtureComponent> comps;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Block c(arr[i], "market.mixture[" + std::to_string(i) + "]");
            market::MixtureComponent mc;
            c.read("eta", mc.tech.eta);
            c.read("f", mc.tech.f);
            c.read("f_I", mc.tech.f_I);
            c.read("weight", mc.weight);
            comps.push_back(mc);
        }
        m.mixture = market::FirmTypeMixture(std::move(comps));
    }
    if (b.has("supply")) {
        Block s(b.raw("supply"), "market.supply");
        s.read("scale_allowed", m.supply.scale_allowed);
        s.read("scale_banned", m.supply.scale_banned);
        s.read("elasticity", m.supply.elasticity);
    }
    return m;
}

void parse_panel(const json& j, panel::PanelConfig& p) {
    Block b(j, "panel");
    b.read("n_treated", p.n_treated);
    b.read("n_control", p.n_control);
    b.read("start_year", p.start_year);
    b.read("end_year", p.end_year);
    b.read("policy_year", p.policy_year);
    b.read("include_policy_year", p.include_policy_year);
    if (b.has("mode")) {
        std::string mode;
        b.read("mode", mode);
        if (mode == "ReducedForm") {
            p.mode = panel::DgpMode::ReducedForm;
        } else if (mode == "Structural") {
            p.mode = panel::DgpMode::Structural;
        } else {
            throw InvalidArgument("panel.mode must be 'ReducedForm' or 'Structural'");
        }
    }
    b.read("true_effect", p.true_effect);
    b.read_optional("per_year_hazard", p.per_year_hazard);
    b.read("background_hazard", p.background_hazard);
    b.read("confounding", p.confounding);
    if (b.has("covariates")) {
        Block c(b.raw("covariates"), "panel.covariates");
        auto& k = p.covariates;
        c.read("size_mean", k.size_mean);
        c.read("size_sd", k.size_sd);
        c.read("roa_mean", k.roa_mean);
        c.read("roa_sd", k.roa_sd);
        c.read("age_mean", k.age_mean);
        c.read("age_sd", k.age_sd);
        c.read("size_firm_share", k.size_firm_share);
        c.read("size_ar", k.size_ar);
        c.read("roa_firm_share", k.roa_firm_share);
        c.read("roa_ar", k.roa_ar);
    }
    b.read("attrition_rate", p.attrition_rate);
    b.read("max_censor_years", p.max_censor_years);
    b.read("roa_missing_rate", p.roa_missing_rate);
    b.read("age_missing_rate", p.age_missing_rate);
    b.read("seed", p.seed);
}

void parse_did(const json& j, did::DidSpec& d, std::optional<numerics::CovMode>& aggregate) {
    Block b(j, "did");
    b.read("post_year", d.post_year);
    b.read("include_policy_year", d.include_policy_year);
    if (b.has("control_level")) {
        std::string level;
        b.read("control_level", level);
        const auto parsed = did::parse_control_level(level);
        if (!parsed) throw InvalidArgument("did.control_level: unknown level '" + level + "'");
        d.control_level = *parsed;
    }
    if (b.has("pretrend")) {
        Block pt(b.raw("pretrend"), "did.pretrend");
        did::PretrendControls controls;
        pt.read("degree", controls.degree);
        if (pt.has("summaries")) {
            const json& arr = pt.raw("summaries");
            if (!arr.is_array()) throw InvalidArgument("did.pretrend.summaries must be an array");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                Block s(arr[i], "did.pretrend.summaries[" + std::to_string(i) + "]");
                did::BaselineSummary summary;
                s.read("covariate", summary.covariate);
                std::string kind = "level";
                s.read("kind", kind);
                if (kind == "level") {
                    summary.kind = did::SummaryKind::Level;
                } else if (kind == "change") {
                    summary.kind = did::SummaryKind::Change;
                } else {
                    throw InvalidArgument(s.path("kind") + " must be 'level' or 'change'");
                }
                controls.summaries.push_back(summary);
            }
        }
        d.pretrend = controls;
    } else {
        d.pretrend.reset();
    }
    if (b.has("cov_mode")) {
        d.cov_mode = parse_cov_mode(b.raw("cov_mode"), "did.cov_mode");
    }
    if (b.has("aggregate_cov_mode")) {
        aggregate = parse_cov_mode(b.raw("aggregate_cov_mode"), "did.aggregate_cov_mode");
    }
}

}  // namespace

RunConfig parse(const json& doc) {
    RunConfig c;
    Block top(doc, "config");
    if (top.has("model")) parse_model(top.raw("model"), c.figure4);
    if (top.has("figure4")) parse_figure4(top.raw("figure4"), c.figure4);
    if (top.has("market")) c.market = parse_market(top.raw("market"), c.market);
    if (top.has("panel")) parse_panel(top.raw("panel"), c.panel);
    if (top.has("did")) parse_did(top.raw("did"), c.did, c.aggregate_cov_mode);
    if (top.has("event_study")) {
        Block e(top.raw("event_study"), "event_study");
        e.read_optional("base_year", c.event_study.base_year);
    }
    if (top.has("validate")) {
        Block v(top.raw("validate"), "validate");
        v.read("reps", c.validate.reps);
        v.read("threads", c.validate.threads);
    }
    if (c.panel.mode == panel::DgpMode::Structural) c.panel.market = c.market;
    c.figure4.validate();
    c.market.validate();
    c.panel.validate();
    c.validate.validate();
    return c;
}

RunConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidArgument("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse(doc);
}

ordered_json market_to_json(const market::MarketConfig& m) {
    ordered_json j;
    j["rho"] = m.prefs.rho;
    j["A"] = m.prefs.A;
    j["lambda_m"] = m.pareto.scale();
    j["alpha"] = m.pareto.shape();
    j["delta_tilde"] = m.delta_tilde;
    ordered_json mix = ordered_json::array();
    for (const auto& c : m.mixture.components()) {
        mix.push_back(ordered_json{{"eta", c.tech.eta}, {"f", c.tech.f}, {"f_I", c.tech.f_I}, {"weight", c.weight}});
    }
    j["mixture"] = mix;
    j["supply"] = ordered_json{{"scale_allowed", m.supply.scale_allowed},
                               {"scale_banned", m.supply.scale_banned},
                               {"elasticity", m.supply.elasticity}};
    return j;
}

ordered_json panel_to_json(const panel::PanelConfig& p) {
    ordered_json j;
    j["n_treated"] = p.n_treated;
    j["n_control"] = p.n_control;
    j["start_year"] = p.start_year;
    j["end_year"] = p.end_year;
    j["policy_year"] = p.policy_year;
    j["include_policy_year"] = p.include_policy_year;
    j["mode"] = std::string(panel::to_string(p.mode));
    j["true_effect"] = p.true_effect;
    j["per_year_hazard"] = p.per_year_hazard ? ordered_json(*p.per_year_hazard) : ordered_json(nullptr);
    j["background_hazard"] = p.background_hazard;
    j["confounding"] = p.confounding;
    const auto& k = p.covariates;
    j["covariates"] = ordered_json{{"size_mean", k.size_mean},         {"size_sd", k.size_sd},
                                   {"roa_mean", k.roa_mean},           {"roa_sd", k.roa_sd},
                                   {"age_mean", k.age_mean},           {"age_sd", k.age_sd},
                                   {"size_firm_share", k.size_firm_share}, {"size_ar", k.size_ar},
                                   {"roa_firm_share", k.roa_firm_share},   {"roa_ar", k.roa_ar}};
    j["attrition_rate"] = p.attrition_rate;
    j["max_censor_years"] = p.max_censor_years;
    j["roa_missing_rate"] = p.roa_missing_rate;
    j["age_missing_rate"] = p.age_missing_rate;
    j["seed"] = p.seed;
    return j;
}

ordered_json did_to_json(const did::DidSpec& d) {
    ordered_json j;
    j["post_year"] = d.post_year;
    j["include_policy_year"] = d.include_policy_year;
    j["control_level"] = std::string(did::to_string(d.control_level));
    if (d.pretrend) {
        ordered_json s = ordered_json::array();
        for (const auto& b : d.pretrend->summaries) {
            s.push_back(ordered_json{{"covariate", b.covariate},
                                     {"kind", b.kind == did::SummaryKind::Level ? "level" : "change"}});
        }
        j["pretrend"] = ordered_json{{"summaries", s}, {"degree", d.pretrend->degree}};
    } else {
        j["pretrend"] = nullptr;
    }
    j["cov_mode"] = cov_mode_to_json(d.cov_mode);
    return j;
}

ordered_json to_json(const RunConfig& c) {
    ordered_json j;
    const auto& p = c.figure4.params;
    j["model"] = ordered_json{{"rho", p.prefs.rho},           {"A", p.prefs.A},
                              {"lambda_m", p.pareto.scale()}, {"alpha", p.pareto.shape()},
                              {"delta_tilde", p.costs.delta_tilde}, {"f", p.tech.f},
                              {"f_I", p.tech.f_I}};
    j["figure4"] = ordered_json{{"etas", c.figure4.etas},
                                {"delta_min", c.figure4.delta_min},
                                {"delta_max", c.figure4.delta_max},
                                {"points", c.figure4.points}};
    j["market"] = market_to_json(c.market);
    j["panel"] = panel_to_json(c.panel);
    j["did"] = did_to_json(c.did);
    j["did"]["aggregate_cov_mode"] = cov_mode_to_json(c.aggregate_cov_mode);
    j["event_study"] = ordered_json{
        {"base_year", c.event_study.base_year ? ordered_json(*c.event_study.base_year) : ordered_json(nullptr)}};
    j["validate"] = ordered_json{{"reps", c.validate.reps}, {"threads", c.validate.threads}};
    return j;
}

}  // namespace vofdi::config
