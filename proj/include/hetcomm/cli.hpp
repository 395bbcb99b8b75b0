#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hetcomm/model.hpp"

namespace hetcomm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

/// Parses "1,4K,64KiB" lists and "start:stop:xFACTOR" geometric ranges (mixable,
/// comma-separated).  K/M/G suffixes are binary.  Result is sorted ascending
/// with duplicates removed.  Throws ConfigError on syntax errors or sizes <= 0.
[[nodiscard]] std::vector<Bytes> parse_sizes(std::string_view text);

/// Runs one command line (args excludes the program name).  Tables go to `out`
/// (or --output), diagnostics to `err`.  Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hetcomm::cli
