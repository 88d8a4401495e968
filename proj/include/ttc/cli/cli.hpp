#pragma once

#include <ostream>

namespace ttc::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitAssertion = 3;

// Acceptance thresholds checked by `eval --assert`.
inline constexpr double kAssertMiou = 0.85;
inline constexpr double kAssertPctError = 5.0;
inline constexpr double kAssertMid = 600.0;
inline constexpr double kAssertEpeSteps = 2.0;  // endpoint error <= this many flow sweep steps

// Runs the `ttc` command line; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ttc::cli
