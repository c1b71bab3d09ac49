#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nlepi {

/// Entry point of the command-line tool. `args[0]` is the program name.
/// Returns 0 on success, 1 on usage or configuration errors, 2 on numerical
/// failure.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nlepi
