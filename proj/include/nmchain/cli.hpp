// cli.hpp: the nmchain command line, callable in-process.
//
// Exit codes: 0 ok, 2 configuration error, 3 numerical invariant violation,
// 4 unsupported feature.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nmchain {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInvariant = 3;
inline constexpr int kExitUnsupported = 4;

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nmchain
