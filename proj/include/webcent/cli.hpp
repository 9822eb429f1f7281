#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace webcent::cli {

// Runs the command line `args` (without the program name). Data goes to
// `out`, diagnostics to `err`. Returns 0 on success, 1 on a runtime error and
// 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace webcent::cli
