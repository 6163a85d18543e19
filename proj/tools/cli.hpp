#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace l1lab::cli {

enum ExitCode : int { kOk = 0, kNumericalFailure = 1, kUsageError = 2 };

/// Runs the command line `args` (args[0] is the program name) and returns the
/// process exit code. Tables go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "2..8", "3" or "2,4,6". Throws std::invalid_argument.
std::vector<int> parse_int_range(const std::string& text);

/// "start:stop:step", inclusive of stop up to rounding. Throws std::invalid_argument.
std::vector<double> parse_grid(const std::string& text);

}  // namespace l1lab::cli
