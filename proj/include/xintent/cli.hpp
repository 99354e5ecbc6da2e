#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xintent {

// Entry point shared by the binary and the in-process CLI tests. args holds
// the command line without the program name. Returns the process exit code:
// 0 success, 1 internal failure, 2 bad user input.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xintent
