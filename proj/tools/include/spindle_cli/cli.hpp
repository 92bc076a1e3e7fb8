#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spindle::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSimulation = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kExitVerification = 5;

/// Runs one `spindle` invocation. `args` excludes the program name.
/// Diagnostics go to `err` as one JSON object per line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spindle::cli
