#pragma once

// Minimal RFC 4180 reader: comma separated, optional double-quoted fields,
// LF or CRLF line ends. Blank lines are skipped.

#include <string>
#include <string_view>
#include <vector>

#include "mt/error.hpp"

namespace mt {

struct CsvRow {
  std::size_t line = 0;  // 1-based line number in the document
  std::vector<std::string> fields;
};

inline std::vector<CsvRow> parse_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  std::size_t pos = 0, line = 1;
  if (text.starts_with("\xEF\xBB\xBF")) pos = 3;
  while (pos < text.size()) {
    CsvRow row;
    row.line = line;
    std::string field;
    bool quoted = false, any = false;
    for (;;) {
      if (pos >= text.size()) break;
      const char c = text[pos];
      if (quoted) {
        if (c == '"') {
          if (pos + 1 < text.size() && text[pos + 1] == '"') {
            field += '"';
            pos += 2;
          } else {
            quoted = false;
            ++pos;
          }
        } else {
          if (c == '\n') ++line;
          field += c;
          ++pos;
        }
        continue;
      }
      if (c == '"' && field.empty()) {
        quoted = true;
        any = true;
        ++pos;
      } else if (c == ',') {
        row.fields.push_back(std::move(field));
        field.clear();
        any = true;
        ++pos;
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
        ++pos;
        break;
      } else {
        field += c;
        any = true;
        ++pos;
      }
    }
    if (quoted) throw Error(ErrorCode::MalformedDocument, "unterminated quote", static_cast<long>(row.line));
    ++line;
    if (!any && field.empty()) continue;
    row.fields.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace mt
