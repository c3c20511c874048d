#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ttnet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line `args` (without the program name). Exit codes:
/// 0 success or PASS, 1 runtime failure or FAIL, 2 usage or precondition error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ttnet::cli
