#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace elm::cli {

enum ExitCode : int { exit_ok = 0, exit_internal = 1, exit_config = 2, exit_numerical = 3 };

/// Runs the command line `args` (without the program name). Headlines go
/// to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace elm::cli
