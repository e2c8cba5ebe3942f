#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace photomesh {

/// Process exit codes of the photomesh executable.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,   // runtime failure, or check-gradients found a mismatch
  kExitConfig = 2,    // bad flags / config file / missing input
  kExitNonFinite = 3, // optimization produced a non-finite loss or gradient
  kExitIo = 4,        // unreadable or unwritable file
};

/// Parses `args` (without the program name), runs the subcommand and maps
/// errors to exit codes. Normal output goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err);

int run_cli(int argc, char **argv);

} // namespace photomesh
