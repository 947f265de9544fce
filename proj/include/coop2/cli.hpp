// Command-line front end: certify, simulate, sweep.
#pragma once

#include <iosfwd>

namespace coop2 {

/// Exit codes: 0 certified / success, 1 bad configuration, 2 refuted,
/// 3 inconclusive.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace coop2
