#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace spindle::cli {

struct RunContext {
  std::optional<std::string> out_path;
  unsigned workers = 1;
  std::ostream& out;
  std::ostream& err;
};

/// Each command validates its whole config before touching the filesystem
/// and returns the process exit code.
int cmd_simulate(const Json& config, const RunContext& ctx);
int cmd_spine(const Json& config, const RunContext& ctx);
int cmd_verify(const Json& config, const RunContext& ctx);
int cmd_sweep(const Json& config, const RunContext& ctx);

}  // namespace spindle::cli
