#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace recurtune::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kIoFailure = 1;
inline constexpr int kUsage = 2;
inline constexpr int kInvalidInput = 3;

// Default directory for outputs when --out is not given.
inline constexpr const char* kOutputDirEnv = "RECURTUNE_OUTPUT_DIR";

// Runs one command line (args exclude the program name).
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace recurtune::cli
