#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mechsql {

/// Exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_usage = 2, exit_model = 3 };

/// Runs the command line `args` (without the program name). Output goes to
/// `out` unless --out is given; errors go to `err` as one JSON line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace mechsql
