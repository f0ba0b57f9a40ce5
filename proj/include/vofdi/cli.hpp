#pragma once

#include "vofdi/config.hpp"

#include <filesystem>
#include <optional>
#include <ostream>

/// Command implementations behind the `vofdi` executable. Each writes its data files into
/// `out_dir` and a short human summary to `summary`; errors propagate as exceptions.
namespace vofdi::cli {

struct CommandOptions {
    std::filesystem::path out_dir = ".";
    std::optional<std::filesystem::path> panel_path;  // input panel for estimate / event-study
};

void cmd_figure4(const config::RunConfig& config, const CommandOptions& opts, std::ostream& summary);
void cmd_equilibrium(const config::RunConfig& config, const CommandOptions& opts, std::ostream& summary);
void cmd_simulate(const config::RunConfig& config, const CommandOptions& opts, std::ostream& summary);
void cmd_estimate(const config::RunConfig& config, const CommandOptions& opts, std::ostream& summary);
void cmd_event_study(const config::RunConfig& config, const CommandOptions& opts, std::ostream& summary);
void cmd_validate(const config::RunConfig& config, const CommandOptions& opts, std::ostream& summary);

}  // namespace vofdi::cli
