#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mvpal {

// Exit codes: 0 success, 2 configuration or input error, 3 runtime failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace mvpal
