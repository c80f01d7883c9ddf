#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xlex {

// Process exit codes of the xlex command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,      // operation-level error (e.g. undefined correlation)
    kExitIo = 2,           // missing or unreadable file
    kExitFormat = 3,       // malformed input file or config
    kExitDimension = 4,    // embedding dimensions disagree
    kExitParameter = 5,    // invalid parameter value
    kExitUsage = 64,       // bad command line
};

// Runs `xlex <args...>` (args excludes the program name) and returns the exit
// code. Normal output goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xlex
