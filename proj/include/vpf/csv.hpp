// Copyright 2026 The VPF Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// RFC 4180 delimited text: a streaming reader over an in-memory buffer and a
// writer that quotes only when needed, so output is byte-stable.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vpf/common.hpp"

namespace vpf::csv {

class Reader {
 public:
  explicit Reader(std::string_view data, char delimiter = ',')
      : data_(data), delim_(delimiter) {
    // UTF-8 byte order mark.
    if (data_.size() >= 3 && data_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
  }

  /// Reads the next record into `fields`. Returns false at end of input.
  /// Blank lines are skipped.
  bool next(std::vector<std::string>& fields) {
    fields.clear();
    while (pos_ < data_.size() && (data_[pos_] == '\n' || data_[pos_] == '\r')) {
      if (data_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= data_.size()) return false;
    std::string field;
    while (true) {
      field.clear();
      if (pos_ < data_.size() && data_[pos_] == '"') {
        ++pos_;
        while (true) {
          if (pos_ >= data_.size()) throw ParseError("unterminated quote at line " + std::to_string(line_));
          const char c = data_[pos_];
          if (c == '"') {
            if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '"') {
              field.push_back('"');
              pos_ += 2;
            } else {
              ++pos_;
              break;
            }
          } else {
            if (c == '\n') ++line_;
            field.push_back(c);
            ++pos_;
          }
        }
        // Anything up to the next separator after a closing quote is kept.
        while (pos_ < data_.size() && data_[pos_] != delim_ && data_[pos_] != '\n' && data_[pos_] != '\r')
          field.push_back(data_[pos_++]);
      } else {
        const std::size_t start = pos_;
        while (pos_ < data_.size() && data_[pos_] != delim_ && data_[pos_] != '\n' && data_[pos_] != '\r') ++pos_;
        field.assign(data_.substr(start, pos_ - start));
      }
      fields.push_back(std::move(field));
      field = std::string();
      if (pos_ >= data_.size()) break;
      if (data_[pos_] == delim_) {
        ++pos_;
        continue;
      }
      // End of record.
      if (data_[pos_] == '\r') ++pos_;
      if (pos_ < data_.size() && data_[pos_] == '\n') {
        ++pos_;
        ++line_;
      }
      break;
    }
    return true;
  }

  std::size_t line() const { return line_; }

 private:
  std::string_view data_;
  char delim_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

/// Appends one field, quoting when it contains the delimiter, a quote, or a
/// line break, or has leading/trailing spaces.
inline void append_field(std::string& out, std::string_view field, char delimiter = ',') {
  bool quote = false;
  for (const char c : field) {
    if (c == delimiter || c == '"' || c == '\n' || c == '\r') {
      quote = true;
      break;
    }
  }
  if (!field.empty() && (field.front() == ' ' || field.back() == ' ')) quote = true;
  if (!quote) {
    out.append(field);
    return;
  }
  out.push_back('"');
  for (const char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

inline void append_row(std::string& out, const std::vector<std::string>& fields, char delimiter = ',') {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(delimiter);
    append_field(out, fields[i], delimiter);
  }
  out.push_back('\n');
}

/// Parsed table: header plus rows, all as text.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name, or -1.
  int column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

inline Table parse_table(std::string_view data, char delimiter = ',') {
  Table t;
  Reader r(data, delimiter);
  if (!r.next(t.header)) return t;
  for (auto& h : t.header) h = std::string(trim(h));
  std::vector<std::string> row;
  while (r.next(row)) t.rows.push_back(row);
  return t;
}

inline Table read_table(const std::string& path, char delimiter = ',') {
  return parse_table(read_file(path), delimiter);
}

inline std::string format_table(const Table& t, char delimiter = ',') {
  std::string out;
  append_row(out, t.header, delimiter);
  for (const auto& row : t.rows) append_row(out, row, delimiter);
  return out;
}

}  // namespace vpf::csv
