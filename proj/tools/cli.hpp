#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gof::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;  // bad arguments, validity range, missing table entry
inline constexpr int kData = 3;   // unparsable or out-of-domain input
inline constexpr int kIo = 4;

// Runs `gofstab <args...>` (args excludes the program name); results go to
// out, notices and errors to err. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gof::cli
