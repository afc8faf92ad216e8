#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hym {

/// Process exit codes of the command-line driver.
enum ExitCode : int {
  exit_ok = 0,
  exit_check_failed = 1, ///< a verification subcommand ran but its check failed
  exit_contract = 2,     ///< invalid input or violated precondition
  exit_obstruction = 3,
  exit_no_convergence = 4,
  exit_usage = 64,
};

/// Runs one subcommand. `args` excludes the program name.
int cli_dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace hym
