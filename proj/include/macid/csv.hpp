#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace macid {

/// Error raised by any of the file loaders. `line()` is 1-based, 0 when the
/// error is not tied to a line.
class load_error : public std::runtime_error {
public:
  explicit load_error(const std::string& message, std::size_t line = 0)
      : std::runtime_error(line == 0 ? message
                                     : "line " + std::to_string(line) + ": " +
                                           message),
        line_{line} {}

  auto line() const noexcept -> std::size_t { return line_; }

private:
  std::size_t line_;
};

inline auto trim(std::string_view s) -> std::string_view {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

inline auto to_lower(std::string_view s) -> std::string {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

/// Minimal RFC 4180 reader: comma separated, double-quoted fields may hold
/// commas, doubled quotes and line breaks. Unquoted fields are trimmed.
class CsvReader {
public:
  explicit CsvReader(std::istream& in) : in_{in} {}

  /// Next record, or nullopt at end of input. Blank lines are skipped.
  auto next() -> std::optional<std::vector<std::string>> {
    std::string line;
    while (true) {
      if (!std::getline(in_, line))
        return std::nullopt;
      ++line_;
      record_line_ = line_;
      strip_cr(line);
      if (!trim(line).empty())
        break;
    }

    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    std::size_t i = 0;
    while (true) {
      if (i == line.size()) {
        if (!quoted)
          break;
        // Quoted field continues on the next physical line.
        std::string more;
        if (!std::getline(in_, more))
          throw load_error("unterminated quoted field", record_line_);
        ++line_;
        strip_cr(more);
        field += '\n';
        line = std::move(more);
        i = 0;
        continue;
      }
      const char c = line[i++];
      if (quoted) {
        if (c == '"') {
          if (i < line.size() && line[i] == '"') {
            field += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field += c;
        }
      } else if (c == '"' && trim(field).empty()) {
        field.clear();
        quoted = true;
        was_quoted = true;
      } else if (c == ',') {
        fields.push_back(finish(field, was_quoted));
        field.clear();
        was_quoted = false;
      } else {
        field += c;
      }
    }
    fields.push_back(finish(field, was_quoted));
    return fields;
  }

  /// Line number where the last returned record started.
  auto line() const noexcept -> std::size_t { return record_line_; }

private:
  static void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r')
      s.pop_back();
  }

  static auto finish(const std::string& field, bool was_quoted)
      -> std::string {
    return was_quoted ? field : std::string(trim(field));
  }

  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

/// Maps header names (case-insensitive, trimmed) to column indices.
class CsvHeader {
public:
  CsvHeader() = default;
  explicit CsvHeader(const std::vector<std::string>& names) {
    for (const auto& n : names)
      names_.push_back(to_lower(trim(n)));
    if (!names_.empty() && names_.front().starts_with("\xEF\xBB\xBF"))
      names_.front().erase(0, 3);
  }

  auto find(std::string_view name) const -> std::optional<std::size_t> {
    const auto key = to_lower(name);
    auto it = std::find(names_.begin(), names_.end(), key);
    if (it == names_.end())
      return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
  }

  auto require(std::string_view name) const -> std::size_t {
    if (auto idx = find(name))
      return *idx;
    throw load_error("missing required column '" + std::string(name) + "'",
                     1);
  }

private:
  std::vector<std::string> names_;
};

inline auto field_at(const std::vector<std::string>& row, std::size_t idx)
    -> std::string_view {
  return idx < row.size() ? std::string_view(row[idx]) : std::string_view{};
}

} // namespace macid
