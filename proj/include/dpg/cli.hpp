#pragma once

#include <iosfwd>

namespace dpg::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsage = 2, kNumeric = 3 };

/// Entry point of the `dpg` driver. Subcommands: ode1d, poisson-converge,
/// poisson-adapt, verify. Messages go to `out`, errors to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dpg::cli
