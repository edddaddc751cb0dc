#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace teamform::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kInfeasible = 3,
  kTimeout = 4,
  kResourceExhausted = 5,
};

/// Entry point of the teamform command. args[0] is the program name.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace teamform::cli
