#pragma once

#include <string>
#include <vector>

namespace rejfilt {

/// Full command-line entry point: parses argv (program name excluded),
/// dispatches to the subcommands and writes results plus a JSON run
/// manifest. Returns 0 on success, 2 on argument errors, 1 on runtime
/// errors.
int run_cli(const std::vector<std::string>& args);

}  // namespace rejfilt
