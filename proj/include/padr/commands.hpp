#pragma once

#include <iosfwd>
#include <string>

#include "padr/config.hpp"

namespace padr {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitHypothesis = 2, kExitAbort = 3 };

/// Prints derived constants and the check report as JSON. Returns
/// kExitHypothesis when any check fails.
int cmd_validate(const RunConfig& cfg, std::ostream& out);

/// Writes trajectory.ndjson, energy.csv and final.padr (per outputs.formats)
/// into outputs.directory and a JSON summary to `out`.
int cmd_simulate(const RunConfig& cfg, std::ostream& out);

/// Writes stationary.padr and stationary.json.
int cmd_stationary(const RunConfig& cfg, std::ostream& out);

/// Writes spectrum.csv (ascending eigenvalues on one line) and, when
/// `dense` is set, operator.csv.
int cmd_spectrum(const RunConfig& cfg, std::ostream& out, bool dense = false);

/// Writes converge.csv.
int cmd_converge(const RunConfig& cfg, std::ostream& out);

/// Dispatches on the command name.
int run_command(const std::string& name, const RunConfig& cfg, std::ostream& out,
                bool dense = false);

}  // namespace padr
