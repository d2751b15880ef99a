#pragma once

#include <iosfwd>

namespace pmt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFlagged = 2;
inline constexpr int kExitNotConverged = 3;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitInvalidInput = 65;
inline constexpr int kExitInternal = 70;

/// Parses argv, runs one subcommand and returns the process exit code.
/// Never throws.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pmt::cli
