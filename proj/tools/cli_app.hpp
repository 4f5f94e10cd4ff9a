#pragma once

namespace dikf::cli {

/// Parses argv, dispatches to the selected subcommand, and maps errors to
/// the process exit contract: 0 success, 1 validation error, 2 numerical
/// failure. Never throws.
int run(int argc, char** argv);

}  // namespace dikf::cli
