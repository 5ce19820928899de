#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pwcc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;
inline constexpr int kExitIo = 4;

// Runs `pwcc <args...>` (args excludes the program name). Normal output goes
// to out, diagnostics to err. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pwcc::cli
