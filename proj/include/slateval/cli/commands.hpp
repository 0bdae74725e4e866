#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace slateval::cli {

/// Exit codes: 0 success, 1 runtime failure (e.g. absolute continuity), 2 bad input
/// (missing file, parse error, invalid config field).
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInput = 2;

/// Entry point behind the slateval binary. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace slateval::cli
