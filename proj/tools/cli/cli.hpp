#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace advpara::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitInternal = 4;

/// Runs one invocation; args[0] is the program name. Reports go to `out`,
/// diagnostics to the log (stderr, level from ADVPARA_LOG).
int run(const std::vector<std::string>& args, std::ostream& out);

}  // namespace advpara::cli
