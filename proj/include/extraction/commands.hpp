#pragma once

#include <iosfwd>
#include <string>

#include "extraction/config.hpp"

namespace extraction::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericError = 3, kInvariantViolation = 4 };

/// Subcommands. Each writes its artifacts under cfg.output.dir, prints a
/// short summary to `log` and returns an ExitCode. Errors propagate as
/// exceptions whose message starts with the failing layer
/// ("specfun:", "boundary:", "value:", "sim:", "oracle:").

/// critical_prices.json, boundary.csv (OU), value_surface.csv.
int cmd_solve(const config::RunConfig& cfg, std::ostream& log);
/// verify_report.json; nonzero when any check fails.
int cmd_verify(const config::RunConfig& cfg, std::ostream& log);
/// sim_result.json and, with sim.trace, trace.csv.
int cmd_simulate(const config::RunConfig& cfg, std::ostream& log);
/// boundary_<parameter>_<value>.csv per value and sweep_report.json.
int cmd_sweep(const config::RunConfig& cfg, std::ostream& log);
/// qvi_grid.csv and oracle_report.json.
int cmd_oracle(const config::RunConfig& cfg, std::ostream& log);

/// Runs the named subcommand and maps exceptions to exit codes, writing the
/// diagnostic to `err`.
int run(const std::string& command, const config::RunConfig& cfg, std::ostream& log, std::ostream& err);

}  // namespace extraction::cli
