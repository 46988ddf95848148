#ifndef PERIGIBBS_CLI_HPP
#define PERIGIBBS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace perigibbs {

// Exit codes of the command-line tool.
inline constexpr int exit_ok = 0;
inline constexpr int exit_verification_failed = 1;
inline constexpr int exit_config_error = 2;
inline constexpr int exit_inconclusive = 3;
inline constexpr int exit_not_found = 4;

/// Environment variable naming the default output directory.
inline constexpr const char* output_env_var = "PERIGIBBS_OUT";

/// Runs one command. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace perigibbs

#endif  // PERIGIBBS_CLI_HPP
