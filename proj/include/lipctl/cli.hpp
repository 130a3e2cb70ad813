#pragma once

#include <iosfwd>

namespace lipctl::cli {

/// Exit codes: 0 success, 1 verification failure, 2 input error.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace lipctl::cli
