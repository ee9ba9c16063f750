#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace venuerec {

// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
// Returns nullopt on broken quoting: an unterminated quote, a quote opening
// mid-field, or trailing characters after a closing quote.
inline std::optional<std::vector<std::string>> split_csv_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool closed = false;  // a quoted field just ended; only ',' or end may follow
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
          closed = true;
        }
      } else {
        cur += c;
      }
      continue;
    }
    if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      closed = false;
    } else if (c == '"') {
      if (!cur.empty() || closed) return std::nullopt;
      quoted = true;
    } else {
      if (closed) return std::nullopt;
      cur += c;
    }
  }
  if (quoted) return std::nullopt;
  fields.push_back(std::move(cur));
  return fields;
}

// Quotes a field when it contains a comma, quote, or newline.
inline std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos)
    return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Fixed formatting used by every CSV writer: 9 significant digits, which
// round-trips through parse/print unchanged.
inline std::string format_value(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace venuerec
