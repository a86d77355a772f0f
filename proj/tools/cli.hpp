#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace p2s::cli {

/// Exit codes shared by all subcommands.
enum ExitCode : int {
    ok = 0,
    satisfiable = 1,
    parse_error = 2,
    invalid_proof = 3,
    budget_exceeded = 4,
};

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace p2s::cli
