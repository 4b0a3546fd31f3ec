#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace textrl {

// Entry point behind the textrl binary. Exit codes: 0 success, 1 validation
// or runtime failure, 2 usage error. Every subcommand draws all randomness
// from the --seed master seed and writes files only under --out.
int run_cli(std::vector<std::string> args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace textrl
