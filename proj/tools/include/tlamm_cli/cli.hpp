#pragma once

#include <iosfwd>

namespace tlamm::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_config = 2,
    exit_data = 3,
    exit_solver = 4,
    exit_partial = 5,
};

/// Entry point of the `tlamm` tool. Diagnostics go to `err`, progress to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace tlamm::cli
