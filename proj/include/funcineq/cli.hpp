#pragma once

#include <iosfwd>

namespace funcineq::cli {

/// Exit codes: 0 all checks passed or computation succeeded, 1 an inequality was
/// violated (the report carries a witness), 2 input or usage error.
inline constexpr int kOk = 0;
inline constexpr int kViolation = 1;
inline constexpr int kInputError = 2;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace funcineq::cli
