#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace robustcp::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kNumerical = 3,
};

/// Entry point behind the robustcp executable. `args` excludes the program
/// name. Subcommands: fit, simulate, evaluate, l1solve.
///
/// `--config FILE` (any subcommand) reads key=value lines and treats each as
/// `--key=value` placed before the command-line flags, so explicit flags
/// win. Keys `command` and `version` are ignored, which lets a run manifest
/// be fed back as a config.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace robustcp::cli
