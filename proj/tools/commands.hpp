#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ipop::cli {

/// Runs one command-line invocation (program name excluded) against the
/// given output and error streams. Exit codes: 0 success, 2 input or parse
/// error, 3 infeasible demand, 4 solver or model failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ipop::cli
