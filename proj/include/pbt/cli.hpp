#pragma once

namespace pbt::cli {

// Parses argv and dispatches to one of the subcommands (fidelity, sweep,
// certify, sdp, simulate, spectrum). Returns the process exit code:
// 0 success, 2 validation, 3 resource cap, 4 convergence, 5 failed
// certificate or violated bound.
int run(int argc, char** argv);

}  // namespace pbt::cli
