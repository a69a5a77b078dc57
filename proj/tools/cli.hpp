#pragma once

#include <iostream>

namespace vshp::cli {

/// Command line entry point (testable in-process).
/// Exit codes: 0 success, 1 numerical failure, 2 usage / file errors.
int run(int argc, const char* const* argv, std::ostream& out = std::cout,
        std::ostream& err = std::cerr);

}  // namespace vshp::cli
