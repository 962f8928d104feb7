#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace compctl::tools {

/// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInfeasible = 2;

/// Parses `args` (without the program name) and runs one subcommand.
/// Machine-readable JSON goes to `out`, human-oriented text to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace compctl::tools
