#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cardie::cli {

/// Runs the `cardie` command line (args excludes the program name) and returns the exit
/// code: 0 ok, 2 configuration error, 3 data error, 4 numeric failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cardie::cli
