#pragma once

#include <string>
#include <vector>

namespace picard::cli {

// Command-line front end. Returns the process exit code: 0 on success, 1 on
// usage errors, 2 on contract violations (oracle mismatch, iteration-cap
// overrun, infeasible actions).
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace picard::cli
