#pragma once

#include <string>
#include <vector>

namespace etd {

/// Dispatches one subcommand. Returns 0 on success, 1 on usage / validation
/// errors, 2 on runtime failures. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace etd
