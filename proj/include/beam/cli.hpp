#pragma once

#include <iosfwd>

namespace beam {

/// Exit codes: 0 success, 1 invalid input or config, 2 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitNumerical = 2;

/// Parses argv and runs one subcommand. Summaries and JSON reports go to
/// `out`, diagnostics to `err`.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace beam
