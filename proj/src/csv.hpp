#pragma once

// Minimal CSV reading for the table and data files: comma separated, optional
// double quotes around a field, '#' comment lines and blank lines skipped.

#include <charconv>
#include <chrono>
#include <ctime>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "gofstab/errors.hpp"

namespace gof::csv {

struct Row {
  std::vector<std::string> fields;  // in the order of the requested columns
  std::size_t line = 0;             // 1-based line in the source
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError("unterminated quote", line_no);
  out.push_back(trim(cur));
  return out;
}

inline double to_number(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty()) {
    throw ParseError("not a number: '" + s + "'", line_no);
  }
  return v;
}

inline bool skippable(const std::string& line) {
  const auto t = trim(line);
  return t.empty() || t[0] == '#';
}

// Reads a headed CSV and returns the requested columns, in the requested order.
// Optional columns come back as empty strings when absent.
inline Table read_table(std::istream& in, const std::vector<std::string>& required,
                        const std::vector<std::string>& optional = {}) {
  Table t;
  std::string line;
  std::size_t line_no = 0;
  std::vector<int> index;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    auto fields = split(line, line_no);
    if (t.header.empty()) {
      t.header = fields;
      auto find = [&](const std::string& name) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
          if (fields[i] == name) return static_cast<int>(i);
        }
        return -1;
      };
      for (const auto& name : required) {
        const int i = find(name);
        if (i < 0) throw ParseError("missing column '" + name + "'", line_no);
        index.push_back(i);
      }
      for (const auto& name : optional) index.push_back(find(name));
      continue;
    }
    Row row;
    row.line = line_no;
    for (int i : index) {
      if (i < 0) {
        row.fields.emplace_back();
      } else if (static_cast<std::size_t>(i) >= fields.size()) {
        throw ParseError("too few fields", line_no);
      } else {
        row.fields.push_back(fields[static_cast<std::size_t>(i)]);
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw ParseError("empty CSV input", 0);
  return t;
}

inline Table read_table(const std::filesystem::path& path, const std::vector<std::string>& required,
                        const std::vector<std::string>& optional = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_table(in, required, optional);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

// Shortest decimal for an alpha stored as round(alpha * 1e9).
inline std::string format_alpha(std::int64_t key) {
  std::string s = std::to_string(key / 1'000'000'000) + ".";
  std::string frac = std::to_string(key % 1'000'000'000);
  frac.insert(0, 9 - frac.size(), '0');
  while (frac.size() > 1 && frac.back() == '0') frac.pop_back();
  return s + frac;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".json");
  return p;
}

// UTC creation stamp for table sidecars.
inline std::string now_iso8601() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace gof::csv
