#pragma once

// Plain-text tables in CSV or aligned form, plus the timing-sample reader.

#include <iosfwd>
#include <string>
#include <vector>

#include "hetcomm/fitting.hpp"

namespace hetcomm {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  friend bool operator==(const Table&, const Table&) = default;
};

/// 9 significant digits, "%.9g".
[[nodiscard]] std::string format_number(double v);
/// Integral sizes print as integers; anything else falls back to format_number.
[[nodiscard]] std::string format_bytes(double v);

/// Header row first, one line per row, '\n' line endings.
void write_csv(std::ostream& out, const Table& table);
/// Reads what write_csv produces.  Throws DataError on ragged rows or a missing header.
[[nodiscard]] Table read_csv(std::istream& in);
/// Columns padded to a common width, separated by two spaces.
void write_aligned(std::ostream& out, const Table& table);

/// Timing-sample CSV.  Header must name `bytes` and `seconds`; `ppn`,
/// `n_messages` and `locality` are optional, blank cells mean "not given".
/// Lines starting with '#' and blank lines are skipped.  Malformed rows throw
/// DataError naming the 1-based line number.  Suspicious values (seconds > 1e3)
/// append a message to `warnings`.
[[nodiscard]] std::vector<TimingSample> read_timing_samples(std::istream& in, std::vector<std::string>& warnings);

/// Writes samples in the same schema (all five columns).
void write_timing_samples(std::ostream& out, const std::vector<TimingSample>& samples);

}  // namespace hetcomm
