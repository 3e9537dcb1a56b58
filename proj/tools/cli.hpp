// Command-line front end. Kept apart from main() so tests can drive it.
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hedp {

constexpr int kExitOk = 0;
constexpr int kExitFindings = 1;
constexpr int kExitUsage = 2;

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hedp
