#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fingat::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // runtime, data, or numeric failure
inline constexpr int kExitUsage = 2;    // bad arguments or configuration

// Entry point of the `fingat` tool. args excludes the program name. Results
// go to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fingat::cli
