#ifndef POLICY_DELTA_CLI_HPP
#define POLICY_DELTA_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "policy_delta/errors.hpp"

namespace policy_delta {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitZeroPropensity = 4;

int ExitCodeFor(ErrorCode code);

// Runs `policy_delta <subcommand> ...`. `args` excludes the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace policy_delta

#endif  // POLICY_DELTA_CLI_HPP
