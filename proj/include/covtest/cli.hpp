#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace covtest::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr int kExitInternal = 1;

/// Runs the command line `args` (args[0] is the program name). Reports go to
/// `out`, diagnostics and timings to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace covtest::cli
