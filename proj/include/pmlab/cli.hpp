#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pmlab::cli {

/// Exit codes: 0 pass, 2 checked-and-failed (or anomaly), 1 operational error.
inline constexpr int kPass = 0;
inline constexpr int kError = 1;
inline constexpr int kFail = 2;

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pmlab::cli
