#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kreinlab::cli {

/// Exit codes: 0 success, 1 invalid input (message names the field),
/// 2 numerical failure (structured JSON error on stderr).
inline constexpr int kOk = 0;
inline constexpr int kValidationFailure = 1;
inline constexpr int kNumericalFailure = 2;

/// Subcommands: convergence | admissibility | spectrum | oracle | form-bound.
/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace kreinlab::cli
