#pragma once

#include <iosfwd>

namespace hasprof {

// Exit codes: 0 ok, 1 acceptance threshold violated, 2 usage or I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitAcceptance = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `hasprof` tool with subcommands analyze, generate,
// evaluate and report.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hasprof
