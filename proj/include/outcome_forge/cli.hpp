#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace outcome_forge {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 2,
    exit_infeasible = 3,
};

/// Runs the command line (without the program name) and returns the process exit code.
/// Messages go to `out`; diagnostics to `err`.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace outcome_forge
