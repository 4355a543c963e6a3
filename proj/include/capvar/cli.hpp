#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace capvar::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

/// Runs one subcommand (example, verify, monotone, blowup, compactness, curvature).
/// `args` excludes the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace capvar::cli
