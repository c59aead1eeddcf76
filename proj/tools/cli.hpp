#pragma once

#include <iosfwd>

namespace skembed::cli {

/// Exit codes: 0 every check passed, 1 infeasible instance or verified violation,
/// 2 configuration error, 3 internal numerical failure.
inline constexpr int kOk = 0;
inline constexpr int kViolation = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kInternalError = 3;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace skembed::cli
