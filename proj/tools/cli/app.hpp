#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace recp::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kConfigError = 2, kIoError = 3 };

// Runs the command line `args` (program name excluded). Results go to `out`
// unless --out names a file; diagnostics and the per-design log go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace recp::cli
