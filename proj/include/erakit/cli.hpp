#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace erakit::cli {

/// Runs the command line in-process. args excludes the program name.
/// Returns the process exit code: 0 ok, 2 usage, 3 data error, 4 insufficient data.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace erakit::cli
