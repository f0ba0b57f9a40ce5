#pragma once

#include "vofdi/did.hpp"
#include "vofdi/market.hpp"
#include "vofdi/model.hpp"
#include "vofdi/panel.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <vector>

/// One JSON document configures every command. Each block is optional; absent keys keep their
/// defaults and unknown keys are rejected.
namespace vofdi::config {

struct Figure4Config {
    // delta and eta are overwritten along the grid
    model::ModelParams params{model::Preferences{0.5, 1.0}, numerics::ParetoDist(1.0, 2.0),
                              model::InputCosts{0.0, 2.0}, model::FirmTechnology{1.0, 1.0, 1.0}};
    std::vector<double> etas{1.0, 2.0, 10.0};
    double delta_min = 0.0;
    double delta_max = 6.0;
    int points = 601;
    void validate() const;
};

struct EventStudyConfig {
    std::optional<int> base_year;  // default: first year of the estimation sample
};

struct ValidateConfig {
    int reps = 100;
    int threads = 0;  // 0: hardware concurrency
    void validate() const;
};

struct RunConfig {
    Figure4Config figure4;
    market::MarketConfig market = market::demo_market(market::DemoScenario::Regime2);
    panel::PanelConfig panel;
    did::DidSpec did;
    std::optional<numerics::CovMode> aggregate_cov_mode;
    EventStudyConfig event_study;
    ValidateConfig validate;
};

/// Parses a config document on top of the defaults. Throws InvalidArgument naming the offending
/// key path.
RunConfig parse(const nlohmann::json& doc);
RunConfig load(const std::filesystem::path& path);

/// Full config with every key spelled out; parse(to_json(c)) reproduces c.
nlohmann::ordered_json to_json(const RunConfig& config);

nlohmann::ordered_json market_to_json(const market::MarketConfig& market);
nlohmann::ordered_json panel_to_json(const panel::PanelConfig& panel);
nlohmann::ordered_json did_to_json(const did::DidSpec& spec);

}  // namespace vofdi::config
