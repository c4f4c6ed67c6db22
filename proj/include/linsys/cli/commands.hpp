#pragma once

#include <iosfwd>
#include <optional>

#include "linsys/cli/config.hpp"

namespace linsys::cli {

enum ExitCode : int { exit_ok = 0, exit_validation = 1, exit_identity = 2, exit_io = 3 };

/// Single trajectory to output.csv_path (or out). Requires runs = 1.
int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);
/// Per-run CSV to output.csv_path and the summary JSON to output.report_path
/// (or out). Requires runs >= 2.
int cmd_ensemble(const RunConfig& config, std::ostream& out, std::ostream& err);
/// PhaseReport JSON to output.report_path (or out) and a readable line.
int cmd_phase(const RunConfig& config, std::ostream& out, std::ostream& err);
/// Identity battery on the configured kernel, BCPP(3, 1) without a config.
int cmd_identities(const std::optional<RunConfig>& config, bool corrupt_beta, std::ostream& out, std::ostream& err);

/// Full command line: subcommand, --config, --seed, --corrupt-beta. Maps
/// errors to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace linsys::cli
