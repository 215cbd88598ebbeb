#pragma once

#include <ostream>

namespace seqinvest::cli {

// Runs the command line against the given streams and returns the exit
// status: 0 success or Supported, 1 negative verdict, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace seqinvest::cli
