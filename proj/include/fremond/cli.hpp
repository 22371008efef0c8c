#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fremond::cli {

enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,
    kConfigError = 2,
    kSolverError = 3,
};

/// args excludes the program name. Reports go to out, diagnostics and usage to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string usage();

} // namespace fremond::cli
