#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace softft::cli {

/// Parses `args` (args[0] is the program name) and runs one subcommand.
/// Returns the process exit status; fatal errors print one JSON line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace softft::cli
