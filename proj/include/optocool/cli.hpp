#pragma once

#include <iosfwd>

namespace optocool::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitIo = 3;

/// Command-line entry point. Data goes to `out` (or the --out file),
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace optocool::cli
