#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace boltssi::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericFailure = 3 };

// args excludes the program name. Records go to `out` unless --output is
// given; summaries and diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace boltssi::cli
