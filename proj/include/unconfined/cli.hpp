#pragma once

#include <ostream>

namespace unconfined {

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kIoError = 1, kRefused = 2, kNotCertified = 3 };

/// Entry point behind the `unconfined` binary; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace unconfined
