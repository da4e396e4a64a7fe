#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lppl::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitIo = 3,
    kExitCalibration = 4,
};

/// Runs one command line (without the program name). Data goes to `out`
/// unless --output is given; diagnostics always go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lppl::cli
