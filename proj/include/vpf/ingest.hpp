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

// Country adapters: read delimited / JSON records / OData JSON / HTML table
// exports, map source columns onto the canonical schema, reject bad rows with
// a reason, then repair missing values (cross-dataset join, agreeing
// neighbors, manual overrides, in that order).

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "vpf/common.hpp"
#include "vpf/config.hpp"
#include "vpf/csv.hpp"
#include "vpf/schema.hpp"

namespace vpf {

// ---------------------------------------------------------------------------
// Field conversion
// ---------------------------------------------------------------------------

/// How raw text is turned into typed values.
struct FieldContext {
  std::vector<std::string> date_formats = {"%Y-%m-%d"};
  const VoteTokenMap* vote_tokens = nullptr;
  const CountryConfig* config = nullptr;  // gender tokens, admissible results
};

namespace detail {

inline std::optional<Date> convert_date(std::string_view v, const FieldContext& ctx) {
  for (const auto& fmt : ctx.date_formats)
    if (auto d = parse_date(trim(v), fmt)) return d;
  return std::nullopt;
}

/// Assigns a single canonical column. Returns an error reason on failure.
/// Empty `v` sets the field to its missing state.
inline std::optional<std::string> set_column(MemberProfile& m, std::size_t col, std::string_view v,
                                             const FieldContext& ctx) {
  switch (col) {
    case 0: m.person_id = trim(v); break;
    case 1: {
      const auto n = parse_int(v);
      if (!n || *n < 1) return "BadInteger(parliament_number)";
      m.parliament_number = static_cast<int>(*n);
      break;
    }
    case 2: m.first_name = trim(v); break;
    case 3: m.last_name = trim(v); break;
    case 4: m.gender = ctx.config ? ctx.config->gender_of(v) : parse_gender(v); break;
    case 5: m.email = trim(v); break;
    case 6: m.party = trim(v); break;
    case 7: m.position = trim(v); break;
    default: return "UnknownField";
  }
  return std::nullopt;
}

inline std::optional<std::string> set_column(BillRecord& b, std::size_t col, std::string_view v,
                                             const FieldContext& ctx) {
  switch (col) {
    case 0: b.bill_id = trim(v); break;
    case 1: {
      const auto n = parse_int(v);
      if (!n) return "BadInteger(parliament_number)";
      b.parliament_number = static_cast<int>(*n);
      break;
    }
    case 2: b.title = trim(v); break;
    case 3: b.committee_id = trim(v); break;
    case 4:
      if (trim(v).empty()) {
        b.date.reset();
      } else {
        b.date = convert_date(v, ctx);
        if (!b.date) return "BadDate(date)";
      }
      break;
    case 5: b.description = trim(v); break;
    case 6: b.speaker_name = trim(v); break;
    default: return "UnknownField";
  }
  return std::nullopt;
}

inline std::optional<std::string> set_column(ProtocolRecord& p, std::size_t col, std::string_view v,
                                             const FieldContext& ctx) {
  switch (col) {
    case 0: p.meeting_id = trim(v); break;
    case 1: {
      const auto n = parse_int(v);
      if (!n) return "BadInteger(parliament_number)";
      p.parliament_number = static_cast<int>(*n);
      break;
    }
    case 2: p.committee_id = trim(v); break;
    case 3: p.meeting_title = trim(v); break;
    case 4:
      if (trim(v).empty()) {
        p.date.reset();
      } else {
        p.date = convert_date(v, ctx);
        if (!p.date) return "BadDate(date)";
      }
      break;
    case 5: p.description = trim(v); break;
    case 6: {
      p.attendees.clear();
      std::string_view rest = trim(v);
      if (!rest.empty()) {
        const char sep = rest.find(';') != std::string_view::npos ? ';' : ',';
        for (const auto& a : split(rest, sep)) {
          const auto t = trim(a);
          if (!t.empty()) p.attendees.emplace_back(t);
        }
      }
      break;
    }
    case 7:
      if (trim(v).empty()) {
        p.attendee_count.reset();
      } else {
        const auto n = parse_int(v);
        if (!n || *n < 0) return "BadInteger(attendee_count)";
        p.attendee_count = static_cast<int>(*n);
      }
      break;
    case 8: p.speaker_name = trim(v); break;
    default: return "UnknownField";
  }
  return std::nullopt;
}

inline std::optional<std::string> set_column(RawVoteRecord& r, std::size_t col, std::string_view v,
                                             const FieldContext& ctx) {
  const auto opt_count = [&](std::optional<int>& out, const char* field) -> std::optional<std::string> {
    if (trim(v).empty()) {
      out.reset();
      return std::nullopt;
    }
    const auto n = parse_int(v);
    if (!n || *n < 0) return std::string("BadInteger(") + field + ")";
    out = static_cast<int>(*n);
    return std::nullopt;
  };
  switch (col) {
    case 0: r.country = trim(v); break;
    case 1: r.vote_id = trim(v); break;
    case 2: {
      const auto n = parse_int(v);
      if (!n) return "BadInteger(parliament_number)";
      r.parliament_number = static_cast<int>(*n);
      break;
    }
    case 3: r.session_id = trim(v); break;
    case 4:
      if (trim(v).empty()) {
        r.vote_date.reset();
      } else {
        r.vote_date = convert_date(v, ctx);
        if (!r.vote_date) return "BadDate(vote_date)";
      }
      break;
    case 5: return opt_count(r.total_for, "total_for");
    case 6: return opt_count(r.total_against, "total_against");
    case 7: r.member_id = trim(v); break;
    case 8: r.member_name = trim(v); break;
    case 9: r.party_id = trim(v); break;
    case 10: r.party_name = trim(v); break;
    case 11: r.member_gender = ctx.config ? ctx.config->gender_of(v) : parse_gender(v); break;
    case 12:
      if (trim(v).empty()) {
        r.is_current.reset();
      } else {
        r.is_current = parse_bool(v);
        if (!r.is_current) return "BadBoolean(is_current)";
      }
      break;
    case 13: {
      static const VoteTokenMap kNumeric = VoteTokenMap::numeric();
      try {
        r.vote_result = canonicalize_vote_result(v, ctx.vote_tokens ? *ctx.vote_tokens : kNumeric);
      } catch (const UnknownVoteToken&) {
        return "UnknownVoteToken(" + std::string(trim(v)) + ")";
      }
      if (ctx.config && !ctx.config->admissible(r.vote_result))
        return "InadmissibleVoteResult(" + std::string(label(r.vote_result)) + ")";
      break;
    }
    default: return "UnknownField";
  }
  return std::nullopt;
}

template <class Record>
std::string get_column(const Record& r, std::size_t col) {
  return to_row(r).at(col);
}

/// Fields that may be absent from a source and empty in a row.
inline bool optional_field(DatasetKind k, std::string_view f) {
  switch (k) {
    case DatasetKind::kMembers: return f == "gender" || f == "email" || f == "position";
    case DatasetKind::kBills: return f == "committee_id" || f == "description";
    case DatasetKind::kVotes:
      return f == "country" || f == "total_for" || f == "total_against" || f == "party_id" ||
             f == "member_gender" || f == "is_current";
    case DatasetKind::kProtocols: return f == "description" || f == "attendee_count";
  }
  return false;
}

template <DatasetKind K>
struct RecordOf;
template <>
struct RecordOf<DatasetKind::kMembers> { using type = MemberProfile; };
template <>
struct RecordOf<DatasetKind::kBills> { using type = BillRecord; };
template <>
struct RecordOf<DatasetKind::kVotes> { using type = RawVoteRecord; };
template <>
struct RecordOf<DatasetKind::kProtocols> { using type = ProtocolRecord; };

}  // namespace detail

template <DatasetKind K>
using record_t = typename detail::RecordOf<K>::type;

// ---------------------------------------------------------------------------
// Source readers
// ---------------------------------------------------------------------------

/// Callback receiving (header, row) for each source record.
using SourceRowFn = std::function<void(const std::vector<std::string>&, const std::vector<std::string>&)>;

namespace detail {

inline std::string json_scalar_text(const nlohmann::json& v) {
  if (v.is_null()) return {};
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_array()) {
    std::vector<std::string> parts;
    for (const auto& e : v) parts.push_back(json_scalar_text(e));
    return join(parts, ";");
  }
  return v.dump();
}

inline void flatten_json(const nlohmann::json& obj, const std::string& prefix,
                         std::vector<std::pair<std::string, std::string>>& out) {
  for (const auto& [k, v] : obj.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) {
      flatten_json(v, key, out);
    } else {
      out.emplace_back(key, json_scalar_text(v));
    }
  }
}

inline void emit_json_records(const nlohmann::json& records, const SourceRowFn& fn) {
  if (!records.is_array()) throw ParseError("expected an array of records");
  std::vector<std::string> header;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<std::pair<std::string, std::string>>> flat;
  for (const auto& rec : records) {
    if (!rec.is_object()) throw ParseError("record is not an object");
    std::vector<std::pair<std::string, std::string>> kv;
    flatten_json(rec, "", kv);
    for (const auto& [k, v] : kv)
      if (index.emplace(k, header.size()).second) header.push_back(k);
    flat.push_back(std::move(kv));
  }
  std::vector<std::string> row;
  for (const auto& kv : flat) {
    row.assign(header.size(), std::string());
    for (const auto& [k, v] : kv) row[index.at(k)] = v;
    fn(header, row);
  }
}

inline std::string decode_entities(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    const std::string_view ent = s.substr(i + 1, semi - i - 1);
    if (ent == "amp") out.push_back('&');
    else if (ent == "lt") out.push_back('<');
    else if (ent == "gt") out.push_back('>');
    else if (ent == "quot") out.push_back('"');
    else if (ent == "apos" || ent == "#39") out.push_back('\'');
    else if (ent == "nbsp") out.push_back(' ');
    else if (!ent.empty() && ent[0] == '#') {
      const bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
      const std::string digits(ent.substr(hex ? 2 : 1));
      char* end = nullptr;
      const unsigned long cp = std::strtoul(digits.c_str(), &end, hex ? 16 : 10);
      if (digits.empty() || *end != '\0') {
        out.append(s.substr(i, semi - i + 1));
      } else if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
      } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      }
    } else {
      out.append(s.substr(i, semi - i + 1));
    }
    i = semi;
  }
  return out;
}

inline std::string lower_ascii(std::string_view s) { return fold_case(s); }

/// Extracts the first <table> of an HTML export as header + rows. Cell text
/// has inner tags stripped, entities decoded and whitespace collapsed.
inline void emit_html_table(std::string_view html, const SourceRowFn& fn) {
  const std::string low = lower_ascii(html);
  const auto table_start = low.find("<table");
  if (table_start == std::string::npos) throw ParseError("no <table> element");
  auto table_end = low.find("</table", table_start);
  if (table_end == std::string::npos) table_end = low.size();

  std::vector<std::vector<std::string>> rows;
  std::size_t pos = table_start;
  while (true) {
    const auto tr = low.find("<tr", pos);
    if (tr == std::string::npos || tr >= table_end) break;
    auto tr_end = low.find("</tr", tr);
    const auto next_tr = low.find("<tr", tr + 3);
    if (tr_end == std::string::npos || (next_tr != std::string::npos && next_tr < tr_end)) tr_end = next_tr;
    if (tr_end == std::string::npos || tr_end > table_end) tr_end = table_end;
    std::vector<std::string> cells;
    std::size_t c = tr;
    while (true) {
      const auto td = low.find("<td", c);
      const auto th = low.find("<th", c);
      const auto cell = std::min(td, th);
      if (cell == std::string::npos || cell >= tr_end) break;
      const auto open_end = low.find('>', cell);
      if (open_end == std::string::npos) break;
      const bool is_th = cell == th;
      auto close = low.find(is_th ? "</th" : "</td", open_end);
      const auto next_cell = std::min(low.find("<td", open_end), low.find("<th", open_end));
      if (close == std::string::npos || close > tr_end || (next_cell < close)) close = std::min(next_cell, tr_end);
      std::string text;
      bool in_tag = false;
      for (std::size_t i = open_end + 1; i < close; ++i) {
        const char ch = html[i];
        if (ch == '<') in_tag = true;
        else if (ch == '>') in_tag = false;
        else if (!in_tag) text.push_back(ch);
      }
      std::string decoded = decode_entities(text);
      std::string collapsed;
      bool space = false;
      for (const char ch : decoded) {
        if (ch == ' ' || ch == '\n' || ch == '\t' || ch == '\r') {
          space = true;
        } else {
          if (space && !collapsed.empty()) collapsed.push_back(' ');
          space = false;
          collapsed.push_back(ch);
        }
      }
      cells.push_back(std::move(collapsed));
      c = close;
    }
    if (!cells.empty()) rows.push_back(std::move(cells));
    pos = tr_end;
  }
  if (rows.empty()) return;
  const auto header = rows.front();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    rows[i].resize(header.size());
    fn(header, rows[i]);
  }
}

}  // namespace detail

/// Streams each record of a source file in its configured export format.
inline void read_source(const std::string& path, const DatasetSource& src, const SourceRowFn& fn) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw FileUnreadable(path);
  const std::string data = read_file(path);
  switch (src.format) {
    case SourceFormat::kDelimited: {
      csv::Reader reader(data, src.delimiter);
      std::vector<std::string> header, row;
      if (!reader.next(header)) return;
      for (auto& h : header) h = std::string(trim(h));
      while (reader.next(row)) {
        row.resize(header.size());
        fn(header, row);
      }
      return;
    }
    case SourceFormat::kJsonRecords:
    case SourceFormat::kODataJson: {
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(data);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
      }
      if (src.format == SourceFormat::kJsonRecords) {
        if (doc.is_object() && doc.contains("records")) doc = doc.at("records");
        detail::emit_json_records(doc, fn);
      } else {
        if (doc.is_object() && doc.contains("value")) {
          detail::emit_json_records(doc.at("value"), fn);
        } else if (doc.is_object() && doc.contains("d") && doc.at("d").contains("results")) {
          detail::emit_json_records(doc.at("d").at("results"), fn);
        } else {
          throw ParseError(path + ": OData document without a value array");
        }
      }
      return;
    }
    case SourceFormat::kHtmlTableExport:
      detail::emit_html_table(data, fn);
      return;
  }
  throw UnsupportedFormat(path);
}

// ---------------------------------------------------------------------------
// parse_dataset
// ---------------------------------------------------------------------------

template <class Record>
struct ParsedDataset {
  std::vector<Record> rows;
  std::vector<RejectEntry> rejects;
};

/// Parses one source dataset of a country into canonical records. Rows that
/// fail conversion go to `rejects` with a reason.
template <DatasetKind K>
ParsedDataset<record_t<K>> parse_dataset(const std::string& path, const CountryConfig& config) {
  using Record = record_t<K>;
  const auto src_it = config.sources.find(K);
  if (src_it == config.sources.end())
    throw SchemaFieldUnmapped(std::string(name(K)) + " has no configured source");
  const DatasetSource& src = src_it->second;
  const auto& columns = canonical_columns(K);

  struct FieldPlan {
    std::vector<std::string> source_columns;  // first non-empty wins
    std::optional<std::regex> pattern;
    std::optional<std::string> constant;
    bool nullable = false;
  };
  std::vector<FieldPlan> plan(columns.size());
  std::map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < columns.size(); ++i) col_index[columns[i]] = i;
  for (const auto& [source_col, fields] : src.field_map) {
    for (const auto& f : fields) {
      const auto it = col_index.find(f);
      if (it == col_index.end())
        throw ConfigInvalid(std::string(name(K)) + " field_map targets unknown field '" + f + "'");
      plan[it->second].source_columns.push_back(source_col);
    }
  }
  for (const auto& [field, re] : src.patterns) {
    const auto it = col_index.find(field);
    if (it == col_index.end()) throw ConfigInvalid("pattern for unknown field '" + field + "'");
    try {
      plan[it->second].pattern.emplace(re, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw ConfigInvalid("bad pattern for '" + field + "': " + e.what());
    }
  }
  for (const auto& [field, v] : src.constants) {
    const auto it = col_index.find(field);
    if (it == col_index.end()) throw ConfigInvalid("constant for unknown field '" + field + "'");
    plan[it->second].constant = v;
  }
  if constexpr (K == DatasetKind::kVotes) {
    if (plan[0].source_columns.empty() && !plan[0].constant) plan[0].constant = config.country;
  }
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const bool optional = detail::optional_field(K, columns[i]);
    const bool repairable = src.repairable.count(columns[i]) > 0;
    plan[i].nullable = optional || repairable;
    if (plan[i].source_columns.empty() && !plan[i].constant && !plan[i].nullable)
      throw SchemaFieldUnmapped(std::string(name(K)) + "." + columns[i]);
  }

  FieldContext ctx;
  ctx.date_formats = src.date_formats;
  ctx.vote_tokens = &config.vote_token_map;
  ctx.config = &config;

  ParsedDataset<Record> out;
  std::vector<std::string> last_header;
  std::vector<std::vector<int>> source_idx(columns.size());
  std::size_t row_no = 0;
  std::string value;
  read_source(path, src, [&](const std::vector<std::string>& header, const std::vector<std::string>& row) {
    ++row_no;
    if (header != last_header) {
      last_header = header;
      for (std::size_t i = 0; i < columns.size(); ++i) {
        source_idx[i].clear();
        for (const auto& sc : plan[i].source_columns) {
          const auto it = std::find(header.begin(), header.end(), sc);
          if (it != header.end()) source_idx[i].push_back(static_cast<int>(it - header.begin()));
        }
      }
    }
    Record rec;
    std::optional<std::string> error;
    for (std::size_t i = 0; i < columns.size() && !error; ++i) {
      value.clear();
      bool found = false;
      for (const int si : source_idx[i]) {
        if (!trim(row[static_cast<std::size_t>(si)]).empty()) {
          value = row[static_cast<std::size_t>(si)];
          found = true;
          break;
        }
      }
      if (!found && plan[i].constant) value = *plan[i].constant;
      if (plan[i].pattern && !value.empty()) {
        std::smatch m;
        if (std::regex_search(value, m, *plan[i].pattern) && m.size() > 1) {
          value = m[1].str();
        } else {
          value.clear();
        }
      }
      if (trim(value).empty()) {
        if (!plan[i].nullable) error = "MissingField(" + columns[i] + ")";
        continue;
      }
      error = detail::set_column(rec, i, value, ctx);
    }
    if (error) {
      out.rejects.push_back({std::string(name(K)), row_no, *error});
    } else {
      out.rows.push_back(std::move(rec));
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Country bundle
// ---------------------------------------------------------------------------

/// Parses every configured dataset of a country directory.
inline RawBundle ingest_country(const std::string& country_dir, const CountryConfig& config) {
  RawBundle bundle;
  const auto path_of = [&](DatasetKind k) {
    return (std::filesystem::path(country_dir) / config.sources.at(k).file).string();
  };
  const auto take = [&](auto parsed, auto& rows) {
    rows = std::move(parsed.rows);
    bundle.rejects.insert(bundle.rejects.end(), parsed.rejects.begin(), parsed.rejects.end());
  };
  if (config.sources.count(DatasetKind::kMembers))
    take(parse_dataset<DatasetKind::kMembers>(path_of(DatasetKind::kMembers), config), bundle.members);
  if (config.sources.count(DatasetKind::kBills))
    take(parse_dataset<DatasetKind::kBills>(path_of(DatasetKind::kBills), config), bundle.bills);
  if (!config.sources.count(DatasetKind::kVotes)) throw SchemaFieldUnmapped("votes has no configured source");
  take(parse_dataset<DatasetKind::kVotes>(path_of(DatasetKind::kVotes), config), bundle.votes);
  if (config.sources.count(DatasetKind::kProtocols))
    take(parse_dataset<DatasetKind::kProtocols>(path_of(DatasetKind::kProtocols), config), bundle.protocols);
  return bundle;
}

// ---------------------------------------------------------------------------
// Repair
// ---------------------------------------------------------------------------

struct OverrideEntry {
  std::string dataset;
  std::string row_key;
  std::string field;
  std::string value;
};

/// Parses an overrides CSV (dataset,row_key,field,value).
inline std::vector<OverrideEntry> parse_overrides(std::string_view text) {
  csv::Table t;
  try {
    t = csv::parse_table(text);
  } catch (const ParseError& e) {
    throw OverrideFileMalformed(e.what());
  }
  if (t.header.empty() && t.rows.empty()) return {};
  if (t.header != std::vector<std::string>{"dataset", "row_key", "field", "value"})
    throw OverrideFileMalformed("header must be dataset,row_key,field,value");
  std::vector<OverrideEntry> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    if (r.size() != 4) throw OverrideFileMalformed("row " + std::to_string(i + 1) + " has " + std::to_string(r.size()) + " fields");
    const auto ds = dataset_from_name(r[0]);
    if (!ds) throw OverrideFileMalformed("unknown dataset '" + r[0] + "'");
    const auto& cols = canonical_columns(*ds);
    if (std::find(cols.begin(), cols.end(), r[2]) == cols.end())
      throw OverrideFileMalformed("unknown field '" + r[2] + "'");
    out.push_back({r[0], r[1], r[2], r[3]});
  }
  return out;
}

namespace detail {

template <class Record>
void neighbor_fill(std::vector<Record>& rows, std::optional<Date> Record::*field, const std::string& dataset,
                   const std::string& field_name, std::vector<RepairLogEntry>& log) {
  if (std::all_of(rows.begin(), rows.end(), [&](const Record& r) { return (r.*field).has_value(); })) return;
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::string> keys(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) keys[i] = rows[i].row_key();
  std::vector<std::vector<std::string>> parts(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) parts[i] = split(keys[i], '|');
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(parts[a].begin(), parts[a].end(), parts[b].begin(), parts[b].end(),
                                        [](const std::string& x, const std::string& y) { return natural_less(x, y); });
  });
  // Nearest known values on each side, taken from the pre-fill state.
  const std::size_t n = order.size();
  std::vector<std::optional<Date>> before(n), after(n);
  std::optional<Date> last;
  for (std::size_t i = 0; i < n; ++i) {
    before[i] = last;
    if (const auto& v = rows[order[i]].*field) last = v;
  }
  last.reset();
  for (std::size_t i = n; i-- > 0;) {
    after[i] = last;
    if (const auto& v = rows[order[i]].*field) last = v;
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& rec = rows[order[i]];
    if (rec.*field) continue;
    if (before[i] && after[i] && *before[i] == *after[i]) {
      rec.*field = before[i];
      log.push_back({dataset, keys[order[i]], field_name, "neighbor", "", before[i]->iso()});
    }
  }
}

template <class Record>
void apply_override(std::vector<Record>& rows, DatasetKind kind, const OverrideEntry& o,
                    std::vector<RepairLogEntry>& log) {
  const auto& cols = canonical_columns(kind);
  const std::size_t col = static_cast<std::size_t>(std::find(cols.begin(), cols.end(), o.field) - cols.begin());
  FieldContext ctx;
  ctx.date_formats = {"%Y-%m-%d"};
  bool hit = false;
  for (auto& r : rows) {
    if (r.row_key() != o.row_key) continue;
    hit = true;
    const std::string old = get_column(r, col);
    if (const auto err = set_column(r, col, o.value, ctx))
      throw OverrideFileMalformed(o.dataset + "/" + o.row_key + "/" + o.field + ": " + *err);
    log.push_back({o.dataset, o.row_key, o.field, "manual", old, get_column(r, col)});
  }
  if (!hit) throw OverrideFileMalformed("no " + o.dataset + " row with key '" + o.row_key + "'");
}

}  // namespace detail

/// Fills missing values in order: cross-dataset join, agreeing neighbors,
/// manual overrides. Every fill is appended to `repair_log`; rows are never
/// removed.
inline RawBundle repair_missing(RawBundle bundle, const std::vector<OverrideEntry>& overrides = {}) {
  auto& log = bundle.repair_log;

  // (a) cross-dataset join
  std::unordered_map<std::string, std::vector<const MemberProfile*>> by_id;
  for (const auto& m : bundle.members) by_id[m.person_id].push_back(&m);
  const auto find_member = [&](const std::string& id, int parliament) -> const MemberProfile* {
    const auto it = by_id.find(id);
    if (it == by_id.end()) return nullptr;
    const MemberProfile* best = nullptr;
    for (const auto* m : it->second) {
      if (!best) {
        best = m;
        continue;
      }
      const int d_new = std::abs(m->parliament_number - parliament);
      const int d_old = std::abs(best->parliament_number - parliament);
      if (d_new < d_old || (d_new == d_old && m->parliament_number < best->parliament_number)) best = m;
    }
    return best;
  };
  for (auto& v : bundle.votes) {
    const bool need = v.member_name.empty() || v.party_name.empty() || v.member_gender == Gender::kUnknown;
    if (!need) continue;
    const MemberProfile* m = find_member(v.member_id, v.parliament_number);
    if (!m) continue;
    if (v.member_name.empty() && !m->full_name().empty()) {
      v.member_name = m->full_name();
      log.push_back({"votes", v.row_key(), "member_name", "cross_join", "", v.member_name});
    }
    if (v.party_name.empty() && !m->party.empty()) {
      v.party_name = m->party;
      log.push_back({"votes", v.row_key(), "party_name", "cross_join", "", v.party_name});
    }
    if (v.member_gender == Gender::kUnknown && m->gender != Gender::kUnknown) {
      v.member_gender = m->gender;
      log.push_back({"votes", v.row_key(), "member_gender", "cross_join", "Unknown", std::string(label(m->gender))});
    }
  }
  for (auto& p : bundle.protocols) {
    const int n = static_cast<int>(p.attendees.size());
    if (!p.attendee_count || *p.attendee_count != n) {
      const std::string old = p.attendee_count ? std::to_string(*p.attendee_count) : "";
      p.attendee_count = n;
      log.push_back({"protocols", p.row_key(), "attendee_count", "derived", old, std::to_string(n)});
    }
  }

  // (b) neighbor fill for monotone date fields
  detail::neighbor_fill(bundle.votes, &RawVoteRecord::vote_date, "votes", "vote_date", log);
  detail::neighbor_fill(bundle.bills, &BillRecord::date, "bills", "date", log);
  detail::neighbor_fill(bundle.protocols, &ProtocolRecord::date, "protocols", "date", log);

  // (c) manual overrides
  for (const auto& o : overrides) {
    const auto kind = dataset_from_name(o.dataset);
    switch (*kind) {
      case DatasetKind::kMembers: detail::apply_override(bundle.members, *kind, o, log); break;
      case DatasetKind::kBills: detail::apply_override(bundle.bills, *kind, o, log); break;
      case DatasetKind::kVotes: detail::apply_override(bundle.votes, *kind, o, log); break;
      case DatasetKind::kProtocols: detail::apply_override(bundle.protocols, *kind, o, log); break;
    }
  }

  // Remaining gaps.
  auto& miss = bundle.unresolved_missing;
  miss.clear();
  for (const auto& v : bundle.votes) {
    if (v.member_name.empty()) ++miss["votes.member_name"];
    if (v.party_name.empty()) ++miss["votes.party_name"];
    if (!v.vote_date) ++miss["votes.vote_date"];
  }
  for (const auto& b : bundle.bills)
    if (!b.date) ++miss["bills.date"];
  for (const auto& p : bundle.protocols)
    if (!p.date) ++miss["protocols.date"];
  return bundle;
}

// ---------------------------------------------------------------------------
// Log files
// ---------------------------------------------------------------------------

inline std::string format_repair_log(const std::vector<RepairLogEntry>& log) {
  std::string out;
  csv::append_row(out, {"dataset", "row_key", "field", "method", "old", "new"});
  for (const auto& e : log) csv::append_row(out, {e.dataset, e.row_key, e.field, e.method, e.old_value, e.new_value});
  return out;
}

inline std::string format_rejects(const std::vector<RejectEntry>& rejects) {
  std::string out;
  csv::append_row(out, {"dataset", "source_row", "reason"});
  for (const auto& r : rejects) csv::append_row(out, {r.dataset, std::to_string(r.source_row), r.reason});
  return out;
}

}  // namespace vpf
