#pragma once

#include <ostream>

namespace eegdiff::train {

/// Command-line entry point. Exit codes: 0 success, 1 validation or runtime
/// failure, 2 usage error (no subcommand, unknown flag, malformed value).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace eegdiff::train
