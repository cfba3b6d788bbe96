#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace splatprep::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 1;
inline constexpr int kExitInternalError = 2;

/// Runs one subcommand. `args` excludes the program name. Usage and
/// diagnostics go to `err`, informational output to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Installs a stderr logger whose level comes from SPLATPREP_LOG
/// (trace, debug, info, warn, error, critical, off; default warn).
void configure_logging();

}  // namespace splatprep::cli
