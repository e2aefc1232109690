#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lcv::cli {

// Entry point behind the `lcv` binary, factored out so tests can drive the
// CLI in-process. Returns the process exit code: 0 success, 2 numeric
// non-convergence or failed verification, 3 input error. Structured errors
// are written to `err` as one JSON object per failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lcv::cli
