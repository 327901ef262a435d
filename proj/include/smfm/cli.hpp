#pragma once

namespace smfm {

/// Entry point of the `smfm` command. Returns the process exit code:
/// 0 success, 1 validation error, 2 I/O error, 3 numerical failure.
int run_cli(int argc, char** argv);

}  // namespace smfm
