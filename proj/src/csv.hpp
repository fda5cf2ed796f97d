#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "atlas/errors.hpp"

namespace atlas::csv {

struct Row {
  std::size_t line = 0;  // 1-based line number in the file
  std::vector<std::string> fields;
};

struct Table {
  std::filesystem::path path;
  std::vector<std::string> header;
  std::vector<Row> rows;
};

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  for (auto& f : out) {
    while (!f.empty() && (f.back() == ' ' || f.back() == '\r')) f.pop_back();
    while (!f.empty() && f.front() == ' ') f.erase(f.begin());
  }
  return out;
}

/// Reads a header-led CSV and checks the header against `expected`. Throws LoadError.
inline Table read(const std::filesystem::path& path, const std::vector<std::string>& expected) {
  std::ifstream in(path);
  if (!in) throw LoadError(fmt::format("missing file {}", path.string()));
  Table table;
  table.path = path;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (table.header.empty()) {
      table.header = split(line);
      if (table.header != expected) {
        throw LoadError(fmt::format("{}: header must be '{}'", path.string(), fmt::join(expected, ",")));
      }
      continue;
    }
    Row row{n, split(line)};
    if (row.fields.size() != expected.size()) {
      throw ValidationError(fmt::format("{} row {}: expected {} fields, got {}", path.string(), n, expected.size(),
                                        row.fields.size()));
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw LoadError(fmt::format("{}: empty file, header row missing", path.string()));
  return table;
}

template <class T>
T parse(const Table& t, const Row& row, std::size_t col) {
  const std::string& f = row.fields[col];
  T value{};
  const auto* end = f.data() + f.size();
  auto [ptr, ec] = std::from_chars(f.data(), end, value);
  if (f.empty() || ec != std::errc() || ptr != end) {
    throw ValidationError(fmt::format("{} row {}: cannot parse '{}' in column {}", t.path.string(), row.line, f,
                                      t.header[col]));
  }
  return value;
}

}  // namespace atlas::csv
