#pragma once

// Command-line driver. Exit codes: 0 every assertion passed, 1 some
// assertion failed, 2 usage or input error.

#include <iosfwd>
#include <string>
#include <vector>

namespace tilelab::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name. Output goes to `out` unless --out is given.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace tilelab::cli
