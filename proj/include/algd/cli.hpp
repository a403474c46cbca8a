#pragma once

#include <string>
#include <vector>

namespace algd {

/// Dispatches one of the subcommands train | eval | verify | landscape.
/// args excludes the program name. Returns the process exit status:
/// 0 success, 1 runtime/config error, 2 usage error; verify returns
/// nonzero when any check fails.
int run_command(const std::vector<std::string>& args);

}  // namespace algd
