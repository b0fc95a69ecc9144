#pragma once

#include <string>
#include <vector>

namespace poison_scan::cli {

/// Exit codes: 0 success, 1 data or I/O error, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;

/// Runs the poison_scan command line; args excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace poison_scan::cli
