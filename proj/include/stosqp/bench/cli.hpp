#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stosqp::bench {

/// Entry point of the stosqp command line tool. `args` excludes the program
/// name. Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
/// Failures print one line "error: kind=... [path=...] message=..." to err.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stosqp::bench
