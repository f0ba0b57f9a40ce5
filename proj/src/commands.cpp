#include "vofdi/cli.hpp"

#include "vofdi/errors.hpp"
#include "vofdi/report.hpp"
#include "vofdi/validation.hpp"

#include <fstream>

namespace vofdi::cli {

namespace {

std::ofstream open_output(const CommandOptions& opts, const std::string& name) {
    std::filesystem::create_directories(opts.out_dir);
    const auto path = opts.out_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    return out;
}

void write_text(const CommandOptions& opts, const std::string& name, const std::string& text) {
    auto out = open_output(opts, name);
    out << text;
    out.flush();
    if (!out) throw Error("failed writing '" + (opts.out_dir / name).string() + "'");
}

void write_json(const CommandOptions& opts, const std::string& name, const nlohmann::ordered_json& j) {
    write_text(opts, name, j.dump(2) + "\n");
}

panel::PanelData input_panel(const CommandOptions& opts) {
    if (!opts.panel_path) throw InvalidArgument("this command needs --panel <csv>");
    return panel::import_csv(*opts.panel_path);
}

}  // namespace

void cmd_figure4(const config::RunConfig& config, const CommandOptions& opts, std::ostream& summary) {
    const auto& fig = config.figure4;
    fig.validate();
    std::string csv = "eta,delta,probability\n";
    for (const double eta : fig.etas) {
        for (int i = 0; i < fig.points; ++i) {
            const double delta = fig.delta_min + (fig.delta_max - fig.delta_min) * i / (fig.points - 1);
            const double p = model::ofdi_probability(fig.params.with_eta(eta).with_delta(delta));
            csv += report::format_double(eta) + "," + report::format_double(delta) + "," + report::format_double(p) + "\n";
        }
        const double saturation = model::saturation_threshold(fig.params.with_eta(eta));
        summary << "eta=" << report::format_double(eta) << ": P reaches 1 at delta=" << report::format_double(saturation)
                << '\n';
    }
    write_text(opts, "figure4.csv", csv);
    summary << "wrote " << fig.etas.size() * static_cast<std::size_t>(fig.points) << " rows to "
            << (opts.out_dir / "figure4.csv").string() << '\n';
}

void cmd_equilibrium(const config::RunConfig& config, const CommandOptions& opts, std::ostream& summary) {
    const auto outcome = market::policy_experiment(config.market);
    nlohmann::ordered_json j;
    j["market"] = config::market_to_json(config.market);
    j["result"] = report::to_json(outcome);
    write_json(opts, "equilibrium.json", j);
    summary << "regime: " << market::to_string(outcome.regime) << '\n'
            << "delta*: " << report::format_double(outcome.before.delta_star) << " -> "
            << report::format_double(outcome.after.delta_star) << '\n'
            << "P(OFDI): " << report::format_double(outcome.before.p_ofdi) << " -> "
            << report::format_double(outcome.after.p_ofdi) << " (change " << report::format_double(outcome.delta_p_ofdi)
            << ")\n";
}

void cmd_simulate(const config::RunConfig& config, const CommandOptions& opts, std::ostream& summary) {
    const auto data = panel::simulate_panel(config.panel);
    std::filesystem::create_directories(opts.out_dir);
    panel::export_csv(data, opts.out_dir / "panel.csv");
    write_json(opts, "panel_meta.json", report::to_json(data.metadata));
    summary << "mode: " << panel::to_string(config.panel.mode) << '\n'
            << "rows: " << data.rows.size() << " (" << data.metadata.n_treated_firms << " treated, "
            << data.metadata.n_control_firms << " control firms)\n"
            << "adopters: " << data.metadata.n_adopters << '\n';
    if (data.metadata.expected_gap) {
        summary << "hazard: " << report::format_double(data.metadata.hazard)
                << ", expected post-period gap: " << report::format_double(*data.metadata.expected_gap) << '\n';
    }
    if (data.metadata.policy) summary << "regime: " << market::to_string(data.metadata.policy->regime) << '\n';
}

void cmd_estimate(const config::RunConfig& config, const CommandOptions& opts, std::ostream& summary) {
    const auto data = input_panel(opts);
    const auto main = did::estimate_did(data, config.did);
    const auto columns = did::build_up(data, config.did);
    did::DidSpec agg_spec = config.did;
    agg_spec.cov_mode = config.aggregate_cov_mode;
    const auto aggregate = did::estimate_aggregate(data, agg_spec);

    nlohmann::ordered_json j;
    j["did"] = config::did_to_json(config.did);
    j["result"] = report::to_json(main);
    nlohmann::ordered_json cols = nlohmann::ordered_json::array();
    for (const auto& c : columns) cols.push_back(report::to_json(c));
    j["build_up"] = cols;
    j["aggregate"] = report::to_json(aggregate);
    j["aggregate_cells"] = report::to_json(did::aggregate_probability(data));
    write_json(opts, "did_result.json", j);
    write_text(opts, "table2.txt", report::build_up_table(columns));
    summary << report::key_values(main) << "aggregate beta2 = " << report::format_double(aggregate.beta2) << " (se "
            << report::format_double(aggregate.beta2_se) << ")\n";
}

void cmd_event_study(const config::RunConfig& config, const CommandOptions& opts, std::ostream& summary) {
    const auto data = input_panel(opts);
    const auto res = did::event_study(data, config.did, config.event_study.base_year);
    std::string csv = "year,estimate,se,p_value\n";
    for (const auto& t : res.terms) {
        csv += std::to_string(t.year) + "," + report::format_double(t.estimate) + "," + report::format_double(t.se) +
               "," + report::format_double(t.p_value) + "\n";
    }
    write_text(opts, "event_study.csv", csv);
    write_json(opts, "event_study.json", report::to_json(res));
    summary << "base year: " << res.base_year << ", terms: " << res.terms.size() << '\n';
    if (res.pre_policy_wald) {
        summary << "pre-policy joint test: chi2(" << res.pre_policy_wald->df
                << ") = " << report::format_double(res.pre_policy_wald->statistic)
                << ", p = " << report::format_double(res.pre_policy_wald->p_value) << '\n';
    } else {
        summary << "pre-policy joint test: no pre-policy terms\n";
    }
}

void cmd_validate(const config::RunConfig& config, const CommandOptions& opts, std::ostream& summary) {
    validation::ValidationOptions vo;
    vo.reps = config.validate.reps;
    vo.root_seed = config.panel.seed;
    vo.threads = config.validate.threads;
    vo.base_year = config.event_study.base_year;
    const auto s = validation::run_validation(config.panel, config.did, vo);
    nlohmann::ordered_json j;
    j["panel"] = config::panel_to_json(config.panel);
    j["did"] = config::did_to_json(config.did);
    j["summary"] = report::to_json(s);
    write_json(opts, "validation.json", j);
    summary << "replications: " << s.reps << '\n'
            << "mean beta2: " << report::format_double(s.mean_beta2) << " (truth " << report::format_double(s.true_effect)
            << ")\n"
            << "bias: " << report::format_double(s.bias) << ", rmse: " << report::format_double(s.rmse) << '\n'
            << "95% CI coverage: " << report::format_double(s.coverage) << '\n'
            << "pre-policy Wald rejection rate: " << report::format_double(s.wald_rejection_rate) << " ("
            << s.wald_tested << " tested, " << s.wald_untestable << " untestable)\n";
}

}  // namespace vofdi::cli
