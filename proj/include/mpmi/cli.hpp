#pragma once

#include <iosfwd>

namespace mpmi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitSolverError = 3;

/// Entry point behind the `mpmi` executable. Reports go to `out`, errors to
/// `err` as `error: <name>: <message>`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mpmi::cli
