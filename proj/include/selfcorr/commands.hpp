#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace selfcorr {

struct CommandOptions {
  std::string config;
  std::vector<std::string> sets;  ///< section.key=value, in order
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<long long> late_window;
  unsigned threads = 0;
};

/// Each command returns a process exit status and reports progress on `log`.
int cmd_run(const CommandOptions& options, std::ostream& log);
int cmd_sweep(const CommandOptions& options, std::ostream& log);
int cmd_bounds(const CommandOptions& options, std::ostream& log);
int cmd_validate(std::ostream& log);

}  // namespace selfcorr
