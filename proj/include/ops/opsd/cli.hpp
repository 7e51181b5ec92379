#pragma once

#include <ostream>

namespace ops::opsd {

/// The `ops` command line. Exit codes: 0 success, 1 domain errors and
/// violations, 2 usage errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ops::opsd
