#pragma once

#include <iosfwd>

namespace nmsoc::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs the `nmsoc` command line. Returns 0 on success, 1 on model or I/O
/// errors and 2 on usage errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace nmsoc::cli
