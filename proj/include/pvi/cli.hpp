#pragma once
// Command-line front end. run_cli is the whole program behind a testable
// seam: it parses arguments (program name excluded), loads the config,
// dispatches the subcommand, and maps exceptions to exit codes (0 success,
// 1 numerical failure, 2 configuration or usage error).

#include <iosfwd>
#include <string>
#include <vector>

namespace pvi {

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pvi
