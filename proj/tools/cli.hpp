#pragma once

#include <iosfwd>

namespace rjbma {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

// Reports go to `out`; errors, notes and help text go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rjbma
