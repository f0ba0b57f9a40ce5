#pragma once

#include "vofdi/did.hpp"
#include "vofdi/market.hpp"
#include "vofdi/panel.hpp"
#include "vofdi/validation.hpp"

#include <json.hpp>

#include <string>
#include <vector>

/// JSON documents and text tables for command output. Field names mirror the result types.
namespace vofdi::report {

nlohmann::ordered_json to_json(const market::Equilibrium& eq);
nlohmann::ordered_json to_json(const market::PolicyOutcome& outcome);
nlohmann::ordered_json to_json(const panel::PanelMetadata& meta);
nlohmann::ordered_json to_json(const did::DidResult& result);
nlohmann::ordered_json to_json(const did::EventStudyResult& result);
nlohmann::ordered_json to_json(const std::vector<did::GroupYearCell>& cells);
nlohmann::ordered_json to_json(const validation::ValidationSummary& summary);

/// Build-up table: one column per control level, coefficient rows with standard errors in
/// parentheses and significance stars, then R^2 and observation counts.
std::string build_up_table(const std::vector<did::DidResult>& columns);

/// "key = value" lines for a single DidResult.
std::string key_values(const did::DidResult& result);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace vofdi::report
