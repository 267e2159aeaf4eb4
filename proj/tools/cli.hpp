#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace motivrec::cli {

enum ExitCode : int {
    ok = 0,
    failure = 1,
    usage = 2,
    missing_artifact = 3,
};

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace motivrec::cli
