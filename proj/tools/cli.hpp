#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mmdopt::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericalError = 3 };

/// Runs the command line `args` (without the program name). Results go to
/// `out` unless --output names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mmdopt::cli
