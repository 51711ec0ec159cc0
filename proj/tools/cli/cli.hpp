#pragma once

#include <ostream>

namespace hazrisk::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kEstimationError = 3,
  kInternalError = 4,
};

// Entry point of the hazrisk command line. Human-readable output goes to
// `out`, warnings and diagnostics to `err`.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hazrisk::cli
