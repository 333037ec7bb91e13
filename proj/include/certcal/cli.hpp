#pragma once

#include <iosfwd>

namespace certcal::cli {

enum ExitCode : int { kCertified = 0, kError = 1, kNotCertified = 2 };

/// Entry point of the `certcal` tool. Reports go to files named by flags or
/// to `out`; diagnostics go to `err`. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace certcal::cli
