#pragma once

#include <ostream>

namespace kincal::cli {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUnexpected = 1,
  kExitUsage = 2,          // bad flags, missing or malformed input files
  kExitNotConverged = 3,   // calibrate hit i_max; results are still written
  kExitCalibrationFailed = 4,
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kincal::cli
