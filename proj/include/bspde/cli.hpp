#pragma once

#include <string>
#include <vector>

namespace bspde {

// Runs the command-line interface on the given arguments (program name
// excluded). Exit codes:
//   0  success / property holds
//   1  selftest failure or unexpected internal error
//   2  configuration or usage error
//   3  numeric or driver-evaluation error
//   4  precondition failed / comparison hypotheses void
//   5  property violation (ordering, axiom, or validator failure)
int run_cli(const std::vector<std::string>& args);

} // namespace bspde
