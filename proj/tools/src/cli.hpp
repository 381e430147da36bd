#pragma once

// Command dispatch for the voimpc executable, kept out of main() so the tests
// can drive every subcommand in-process.

#include <ostream>
#include <string>
#include <vector>

namespace voimpc::cli {

// args excludes the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace voimpc::cli
