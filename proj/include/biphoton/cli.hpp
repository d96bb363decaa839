#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace biphoton {

/// Runs one command line (without the program name). Failures are reported on `err` as
/// `error: kind=<kind> message="<text>"` and yield a nonzero status.
int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace biphoton
