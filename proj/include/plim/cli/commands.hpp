#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "plim/atlas/build.hpp"
#include "plim/cli/config.hpp"

namespace plim::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kSolverFailure = 3, kRunFailure = 4 };

/// Exit code for an error escaping a command.
int exit_code_for(const Error& e);

/// Fine coordinate names used in file names and columns.
std::vector<std::string> variable_names(const std::string& system);

/// Writes the commented template; refuses to overwrite an existing file.
int cmd_init(const std::string& path, std::ostream& log);

/// Reads config.atlas.path, or generates the atlas the config describes.
Atlas obtain_atlas(const RunConfig& config, std::ostream& log, BuildReport* report = nullptr);

/// Generates the atlas and writes it to atlas_path (default <out>/atlas.plim).
/// Aborts with SolverFailed when failures exceed the budget.
int cmd_precompute(const RunConfig& config, const std::string& atlas_path, std::ostream& log);

/// Coarse run only (run.csv, transfers.csv, summary.json). Elastowave runs
/// write history.csv, fields.csv and summary.json.
int cmd_evolve(const RunConfig& config, std::ostream& log);

/// Fine and coarse runs from the same initial state with per-variable
/// trajectories, running averages, transfers, phase data, a summary and a
/// plot script. Outputs written so far are kept when a run fails.
int cmd_compare(const RunConfig& config, std::ostream& log);

/// Running averages (plus absolute-value variants) of every column of a
/// CSV whose first column is uniformly spaced time from 0.
int cmd_average(const std::string& input, const std::string& output, std::ostream& log);

}  // namespace plim::cli
