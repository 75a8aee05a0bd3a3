#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ltv::cli {

/// Process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,      ///< bad arguments, unreadable or malformed problem file
  kModelRejected = 2,   ///< NotCommutingClass / DegenerateA12
  kNumericalFailure = 3 ///< overflow, integration or quadrature failure, failed checks
};

/// Runs `ltv <command> <file> [flags]`; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ltv::cli
