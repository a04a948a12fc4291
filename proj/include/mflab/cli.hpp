// Configuration-driven entry point: one experiment per invocation,
// schema-validated JSON configs (version 1, unknown keys rejected),
// deterministic artifacts — CSV tables, JSON reports, a run manifest,
// gnuplot command files — under a per-run output directory.
//
// Exit statuses: 0 success, 2 configuration/validation error (the
// message names the offending key), 3 numerical failure.
#ifndef MFLAB_CLI_HPP
#define MFLAB_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace mflab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one invocation.  `args` excludes the program name (pass argv+1
/// … argv+argc).  Normal output goes to `out`, diagnostics to `err`.
/// Never throws; every failure maps to an exit status and a message.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace mflab::cli

#endif  // MFLAB_CLI_HPP
