#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jitvar {

/// Exit codes: 0 success, 1 user error (bad flags, bad input), 2 internal error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInternal = 2;

/// Entry point of the `jitvar` tool. args excludes the program name.
/// Subcommands: gen-data, run, report, compare.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace jitvar
