#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace seqcp::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,      // bad flags, unreadable or invalid input
  kNumerical = 3,  // solver or state divergence
};

// Entry point of the `seqcp` tool. Results go to files or `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace seqcp::cli
