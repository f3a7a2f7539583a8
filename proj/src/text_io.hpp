#pragma once

// Number formatting/parsing shared by the CSV readers and writers. Output
// uses the shortest round-trip representation so files are byte-stable and
// re-parse to identical doubles.

#include <charconv>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geopin/error.hpp"

namespace geopin::detail {

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

/// Reads a CSV file with a fixed header. Calls `row(fields, line_number)` for
/// each non-empty data line. Strips a trailing '\r' and a UTF-8 BOM.
template <typename RowFn>
void read_csv(const std::filesystem::path& path, std::string_view expected_header, RowFn&& row);

[[noreturn]] inline void csv_fail(const std::filesystem::path& path, std::size_t line,
                                  const std::string& what) {
  throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line) + ": " + what);
}

std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

template <typename RowFn>
void read_csv(const std::filesystem::path& path, std::string_view expected_header, RowFn&& row) {
  const std::string text = read_text_file(path);
  std::string_view rest = text;
  if (rest.substr(0, 3) == "\xEF\xBB\xBF") rest.remove_prefix(3);
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!rest.empty()) {
    auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header_seen) {
      if (line != expected_header) {
        csv_fail(path, line_no, "expected header '" + std::string(expected_header) + "'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    row(split_csv_line(line), line_no);
  }
  if (!header_seen) csv_fail(path, 1, "empty file, expected a header");
}

}  // namespace geopin::detail
