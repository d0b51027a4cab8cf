#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coverscan {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Runs the coverscan command line. `args` excludes the program name.
/// Results go to `out`, diagnostics and the effective configuration to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coverscan
