#pragma once

#include <iosfwd>

namespace scenegraph {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

/// Entry point of the `scenegraph` command line tool. Normal output goes to
/// `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace scenegraph
