#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace martlab::cli {

enum ExitCode : int {
  kSuccess = 0,
  kConfigError = 2,
  kAssertionFailed = 3,
  kRefused = 4,
};

/// Runs one invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace martlab::cli
