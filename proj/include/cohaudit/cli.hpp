#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cohaudit {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitSuccess = 0,
  kExitDataError = 1,     // degenerate or malformed data, math domain failures
  kExitUsage = 2,         // bad command-line arguments
  kExitVerifyFailed = 3,  // an empirical check contradicted a bound
};

/// Runs the tool with `args` (excluding the program name). Subcommands:
/// audit, verify, phase, separate.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cohaudit
