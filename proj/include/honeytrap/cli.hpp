#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace honeytrap {

/// Entry point of the honeytrap tool. args excludes the program name.
/// Returns the process exit status; on failure exactly one line goes to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Applies HONEYTRAP_LOG_LEVEL (error, warn, info, debug; default warn) to a
/// stderr logger. Throws std::invalid_argument on an unknown level.
void configure_logging();

} // namespace honeytrap
