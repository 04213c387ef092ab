// Command-line front end.  run_cli is the whole program (main delegates),
// which keeps argument handling and exit-code mapping testable in-process.
#pragma once

namespace qmed {

// Exit codes: 0 success, 1 usage, 2 schema, 3 validation, 4 estimation,
// 5 inference.
int run_cli(int argc, const char* const* argv);

} // namespace qmed
