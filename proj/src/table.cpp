#include "hetcomm/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string_view>

#include "hetcomm/error.hpp"

namespace hetcomm {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string format_bytes(double v) {
  if (std::isfinite(v) && v >= 0.0 && v < 9007199254740992.0 && std::floor(v) == v) {
    return std::to_string(static_cast<std::uint64_t>(v));
  }
  return format_number(v);
}

namespace {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool skippable(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

}  // namespace

void write_csv(std::ostream& out, const Table& table) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
}

Table read_csv(std::istream& in) {
  Table t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (skippable(line)) continue;
      t.header = split(line);
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                      " fields, found " + std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw DataError("csv has no header row");
  return t;
}

void write_aligned(std::ostream& out, const Table& table) {
  std::vector<std::size_t> width(table.header.size(), 0);
  auto measure = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size() && i < width.size(); ++i) width[i] = std::max(width[i], cells[i].size());
  };
  measure(table.header);
  for (const auto& r : table.rows) measure(r);
  auto line = [&](const std::vector<std::string>& cells) {
    std::string text;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text += "  ";
      text += cells[i];
      if (i + 1 < cells.size()) text.append(width[i] - cells[i].size(), ' ');
    }
    out << text << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
}

namespace {

enum class Column { Bytes, Seconds, Ppn, Messages, Locality };

double parse_double(std::string_view cell, std::size_t lineno, const char* column) {
  cell = trim(cell);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw DataError("line " + std::to_string(lineno) + ": " + column + " value '" + std::string(cell) +
                    "' is not a number");
  }
  return v;
}

Count parse_count(std::string_view cell, std::size_t lineno, const char* column) {
  cell = trim(cell);
  Count v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty() || v < 1) {
    throw DataError("line " + std::to_string(lineno) + ": " + column + " value '" + std::string(cell) +
                    "' is not a positive integer");
  }
  return v;
}

}  // namespace

std::vector<TimingSample> read_timing_samples(std::istream& in, std::vector<std::string>& warnings) {
  std::vector<Column> columns;
  std::vector<TimingSample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    auto cells = split(trim(line));
    if (columns.empty()) {
      bool has_bytes = false, has_seconds = false;
      for (const auto& raw : cells) {
        const auto name = trim(raw);
        Column c;
        if (name == "bytes") {
          c = Column::Bytes;
        } else if (name == "seconds") {
          c = Column::Seconds;
        } else if (name == "ppn") {
          c = Column::Ppn;
        } else if (name == "n_messages") {
          c = Column::Messages;
        } else if (name == "locality") {
          c = Column::Locality;
        } else {
          throw DataError("line " + std::to_string(lineno) + ": unknown column '" + std::string(name) + "'");
        }
        if (std::find(columns.begin(), columns.end(), c) != columns.end()) {
          throw DataError("line " + std::to_string(lineno) + ": duplicate column '" + std::string(name) + "'");
        }
        has_bytes = has_bytes || c == Column::Bytes;
        has_seconds = has_seconds || c == Column::Seconds;
        columns.push_back(c);
      }
      if (!has_bytes || !has_seconds) {
        throw DataError("line " + std::to_string(lineno) + ": header must contain 'bytes' and 'seconds'");
      }
      continue;
    }
    if (cells.size() != columns.size()) {
      throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(columns.size()) +
                      " fields, found " + std::to_string(cells.size()));
    }
    TimingSample s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto cell = trim(cells[i]);
      switch (columns[i]) {
        case Column::Bytes:
          s.bytes = parse_double(cell, lineno, "bytes");
          break;
        case Column::Seconds:
          s.seconds = parse_double(cell, lineno, "seconds");
          break;
        case Column::Ppn:
          if (!cell.empty()) s.ppn = parse_count(cell, lineno, "ppn");
          break;
        case Column::Messages:
          if (!cell.empty()) s.n_messages = parse_count(cell, lineno, "n_messages");
          break;
        case Column::Locality:
          if (!cell.empty()) {
            s.locality = parse_locality(cell);
            if (!s.locality) {
              throw DataError("line " + std::to_string(lineno) + ": unknown locality '" + std::string(cell) + "'");
            }
          }
          break;
      }
    }
    try {
      validate_sample(s);
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (s.seconds > 1e3) {
      warnings.push_back("line " + std::to_string(lineno) + ": seconds value " + format_number(s.seconds) +
                         " exceeds 1e3; are the timings in milliseconds?");
    }
    out.push_back(s);
  }
  return out;
}

void write_timing_samples(std::ostream& out, const std::vector<TimingSample>& samples) {
  out << "bytes,seconds,ppn,n_messages,locality\n";
  char buf[64];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%.17g", s.seconds);
    out << format_bytes(s.bytes) << ',' << buf << ',' << (s.ppn ? std::to_string(*s.ppn) : "") << ','
        << s.n_messages << ',' << (s.locality ? std::string(to_string(*s.locality)) : "") << '\n';
  }
}

}  // namespace hetcomm
