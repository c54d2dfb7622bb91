#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace polyscat::cli {

enum ExitCode : int { ok = 0, validation = 2, solver = 3, io = 4 };

/// Runs one command line (args[0] is the program name). Data goes to files
/// only; `out` receives --version/--help text and `err` progress and errors.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace polyscat::cli
