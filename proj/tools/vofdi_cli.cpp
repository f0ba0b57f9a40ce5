#include "vofdi/cli.hpp"
#include "vofdi/errors.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <functional>
#include <iostream>
#include <map>

namespace {

using Command = std::function<void(const vofdi::config::RunConfig&, const vofdi::cli::CommandOptions&, std::ostream&)>;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vertical OFDI model, market equilibrium, panel simulation and DID estimation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::string panel_path;
    std::uint64_t seed = 0;
    int reps = 0;

    const std::map<std::string, std::pair<std::string, Command>> commands{
        {"figure4", {"OFDI probability curves over the domestic input cost", vofdi::cli::cmd_figure4}},
        {"equilibrium", {"input-market equilibrium with and without the import ban", vofdi::cli::cmd_equilibrium}},
        {"simulate", {"simulate a firm-year panel", vofdi::cli::cmd_simulate}},
        {"estimate", {"DID estimates, build-up table and aggregate model for a panel", vofdi::cli::cmd_estimate}},
        {"event-study", {"year-by-treatment interactions and pre-policy joint test", vofdi::cli::cmd_event_study}},
        {"validate", {"Monte Carlo replications of simulate and estimate", vofdi::cli::cmd_validate}},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, entry] : commands) {
        auto* sub = app.add_subcommand(name, entry.first);
        sub->add_option("--config", config_path, "JSON config file (defaults apply when omitted)");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "root seed, overrides panel.seed");
        sub->add_option("--reps", reps, "replication count, overrides validate.reps");
        if (name == "estimate" || name == "event-study") {
            sub->add_option("--panel", panel_path, "panel CSV to estimate on")->required();
        }
        subs[name] = sub;
    }
    auto* reference = app.add_subcommand("config-reference", "print the full default config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (reference->parsed()) {
            std::cout << vofdi::config::to_json(vofdi::config::RunConfig{}).dump(2) << '\n';
            return 0;
        }
        nlohmann::json doc = nlohmann::json::object();
        if (!config_path.empty()) {
            doc = nlohmann::json(vofdi::config::to_json(vofdi::config::load(config_path)));
        }
        for (const auto& [name, sub] : subs) {
            if (!sub->parsed()) continue;
            if (sub->count("--seed") > 0) doc["panel"]["seed"] = seed;
            if (sub->count("--reps") > 0) doc["validate"]["reps"] = reps;
        }
        const auto config = vofdi::config::parse(doc);
        vofdi::cli::CommandOptions opts;
        opts.out_dir = out_dir;
        if (!panel_path.empty()) opts.panel_path = panel_path;
        for (const auto& [name, sub] : subs) {
            if (sub->parsed()) commands.at(name).second(config, opts, std::cout);
        }
    } catch (const vofdi::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
