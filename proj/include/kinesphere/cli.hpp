#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kinesphere {

/// Exit codes shared by every subcommand.
enum ExitCode { exit_ok = 0, exit_failure = 1, exit_usage = 2, exit_io = 3 };

/// Runs the command-line tool. `args` excludes the program name. Machine
/// output goes to `out` as JSON, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kinesphere
