#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace saddle::cli {

enum ExitCode : int { kSuccess = 0, kFailure = 1, kNotConverged = 2, kConfigError = 3 };

/// Runs one subcommand; `args` excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace saddle::cli
