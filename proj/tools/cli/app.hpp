#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spdelab::cli {

/// Exit codes besides 0 (success) and CLI11's own parse-error codes.
enum ExitCode : int {
  kRuntimeError = 1,
  kConfigError = 2,
  kRegimeViolation = 3,
  kBlowUp = 4,
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spdelab::cli
