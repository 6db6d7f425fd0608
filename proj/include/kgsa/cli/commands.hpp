#pragma once

#include <string>
#include <vector>

#include "kgsa/cli/config.hpp"
#include "kgsa/cli/report.hpp"

namespace kgsa::cli {

enum ExitCode : int { kExitPass = 0, kExitHypothesis = 1, kExitConfig = 2, kExitInternal = 3 };

const std::vector<std::string>& command_names();

/// Runs one command. Library errors raised by the computation become failed
/// records; ConfigError propagates.
Report run_command(const std::string& command, const RunConfig& config);

/// `kgsa <command> --config <path> [--out <dir>] [--seed <u64>] [--grid NxNxN]`
int run_cli(int argc, char** argv);

}  // namespace kgsa::cli
