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

// Per-country configuration: source formats, field mappings, vote tokens,
// coalition table, position ranks and feature settings. Loaded from JSON.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "vpf/common.hpp"
#include "vpf/schema.hpp"

namespace vpf {

enum class SourceFormat { kDelimited, kJsonRecords, kODataJson, kHtmlTableExport };

inline std::optional<SourceFormat> source_format_from_name(std::string_view n) {
  if (n == "delimited") return SourceFormat::kDelimited;
  if (n == "json_records") return SourceFormat::kJsonRecords;
  if (n == "odata_json") return SourceFormat::kODataJson;
  if (n == "html_table_export") return SourceFormat::kHtmlTableExport;
  return std::nullopt;
}

struct DatasetSource {
  std::string file;  // relative to the country directory
  SourceFormat format = SourceFormat::kDelimited;
  char delimiter = ',';
  /// Source column -> one or more schema fields.
  std::map<std::string, std::vector<std::string>> field_map;
  /// Schema field -> regex whose first capture group extracts the value.
  std::map<std::string, std::string> patterns;
  std::vector<std::string> date_formats = {"%Y-%m-%d"};
  /// Required schema fields that may be absent and are filled by repair.
  std::set<std::string> repairable;
  /// Fixed values for schema fields with no source column.
  std::map<std::string, std::string> constants;
};

struct CoalitionEntry {
  int parliament_number = 0;
  std::string party_name;
  bool in_coalition = false;
};

enum class BillLink { kSessionId, kVoteId };

struct EmbeddingConfig {
  int dim = 64;
  std::uint64_t seed = 0;
  std::string precomputed_file;  // empty: hashed embedder
};

struct EncodingPolicy {
  bool parliament_number_categorical = false;
  std::set<std::string> exclude;
};

struct CountryConfig {
  std::string country;
  YearRange year_range;
  std::string parliament_type;
  std::map<DatasetKind, DatasetSource> sources;
  VoteTokenMap vote_token_map;
  std::map<std::string, Gender> gender_tokens;
  std::vector<VoteResult> admissible_vote_results;
  std::vector<CoalitionEntry> coalition_table;
  std::optional<bool> coalition_default;
  std::map<std::string, int> position_rank_dict;
  int rank_max = 0;
  BillLink bill_link = BillLink::kSessionId;
  EmbeddingConfig embedding;
  std::vector<std::string> stopwords;
  /// Protocol look-back for the reference count; 0 means all earlier ones.
  int reference_window_days = 365;
  EncodingPolicy encoding;
  std::string base_dir;  // directory the config was loaded from

  bool admissible(VoteResult r) const {
    return std::find(admissible_vote_results.begin(), admissible_vote_results.end(), r) !=
           admissible_vote_results.end();
  }

  std::vector<int> class_codes() const {
    std::vector<int> out;
    for (const auto r : admissible_vote_results) out.push_back(code(r));
    std::sort(out.begin(), out.end());
    return out;
  }

  Gender gender_of(std::string_view raw) const {
    const auto it = gender_tokens.find(fold_case(trim(raw)));
    if (it != gender_tokens.end()) return it->second;
    return parse_gender(raw);
  }
};

namespace detail {

inline VoteResult vote_result_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) {
    if (const auto r = vote_result_from_code(j.get<long long>())) return *r;
  } else if (j.is_string()) {
    return canonicalize_vote_result(j.get<std::string>(), VoteTokenMap::numeric());
  }
  throw ConfigInvalid("bad vote result " + j.dump());
}

inline DatasetSource source_from_json(const nlohmann::json& j) {
  DatasetSource s;
  s.file = j.at("file").get<std::string>();
  const auto fmt = source_format_from_name(j.value("format", "delimited"));
  if (!fmt) throw UnsupportedFormat(j.value("format", ""));
  s.format = *fmt;
  const std::string delim = j.value("delimiter", ",");
  s.delimiter = delim == "\\t" ? '\t' : (delim.empty() ? ',' : delim[0]);
  if (j.contains("field_map")) {
    for (const auto& [src, dst] : j.at("field_map").items()) {
      if (dst.is_array()) {
        for (const auto& f : dst) s.field_map[src].push_back(f.get<std::string>());
      } else {
        s.field_map[src].push_back(dst.get<std::string>());
      }
    }
  }
  if (j.contains("patterns"))
    for (const auto& [field, re] : j.at("patterns").items()) s.patterns[field] = re.get<std::string>();
  if (j.contains("date_formats")) s.date_formats = j.at("date_formats").get<std::vector<std::string>>();
  if (j.contains("repairable"))
    for (const auto& f : j.at("repairable")) s.repairable.insert(f.get<std::string>());
  if (j.contains("constants"))
    for (const auto& [field, v] : j.at("constants").items()) s.constants[field] = v.get<std::string>();
  return s;
}

}  // namespace detail

/// Builds a config from its JSON form. `base_dir` resolves relative paths.
inline CountryConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = ".") {
  CountryConfig c;
  c.base_dir = base_dir;
  try {
    c.country = j.at("country").get<std::string>();
    if (j.contains("year_range")) {
      const auto yr = j.at("year_range");
      c.year_range = {yr.at(0).get<int>(), yr.at(1).get<int>()};
    }
    c.parliament_type = j.value("parliament_type", "");
    for (const auto& [ds, src] : j.at("datasets").items()) {
      const auto kind = dataset_from_name(ds);
      if (!kind) throw ConfigInvalid("unknown dataset '" + ds + "'");
      c.sources[*kind] = detail::source_from_json(src);
    }
    // Without an explicit map, the numeric codes 1..5 are accepted.
    if (j.contains("vote_tokens")) {
      for (const auto& [token, r] : j.at("vote_tokens").items())
        c.vote_token_map.add(token, detail::vote_result_from_json(r));
    } else {
      c.vote_token_map = VoteTokenMap::numeric();
    }
    if (j.contains("gender_tokens"))
      for (const auto& [token, g] : j.at("gender_tokens").items())
        c.gender_tokens[fold_case(trim(token))] = parse_gender(g.get<std::string>());
    if (j.contains("admissible_vote_results")) {
      for (const auto& r : j.at("admissible_vote_results"))
        c.admissible_vote_results.push_back(detail::vote_result_from_json(r));
    } else {
      c.admissible_vote_results = {kAllVoteResults.begin(), kAllVoteResults.end()};
    }
    if (j.contains("coalition"))
      for (const auto& e : j.at("coalition"))
        c.coalition_table.push_back({e.at("parliament").get<int>(), e.at("party").get<std::string>(),
                                     e.at("in_coalition").get<bool>()});
    if (j.contains("coalition_default") && !j.at("coalition_default").is_null())
      c.coalition_default = j.at("coalition_default").get<bool>();
    if (j.contains("position_ranks"))
      for (const auto& [pos, r] : j.at("position_ranks").items())
        c.position_rank_dict[fold_case(trim(pos))] = r.get<int>();
    c.rank_max = j.value("rank_max", 0);
    const std::string link = j.value("bill_link", "session_id");
    if (link == "session_id") {
      c.bill_link = BillLink::kSessionId;
    } else if (link == "vote_id") {
      c.bill_link = BillLink::kVoteId;
    } else {
      throw ConfigInvalid("bill_link must be session_id or vote_id");
    }
    if (j.contains("embedding")) {
      const auto& e = j.at("embedding");
      c.embedding.dim = e.value("dim", 64);
      c.embedding.seed = e.value("seed", std::uint64_t{0});
      c.embedding.precomputed_file = e.value("precomputed", "");
    }
    if (j.contains("stopwords_file")) {
      const std::filesystem::path p = std::filesystem::path(base_dir) / j.at("stopwords_file").get<std::string>();
      std::istringstream in(read_file(p.string()));
      std::string line;
      while (std::getline(in, line)) {
        const auto w = fold_case(trim(line));
        if (!w.empty() && w[0] != '#') c.stopwords.push_back(w);
      }
    }
    c.reference_window_days = j.value("reference_window_days", 365);
    if (j.contains("stopwords"))
      for (const auto& w : j.at("stopwords")) c.stopwords.push_back(fold_case(trim(w.get<std::string>())));
    if (j.contains("encoding")) {
      const auto& e = j.at("encoding");
      c.encoding.parliament_number_categorical = e.value("parliament_number", "numeric") == "categorical";
      if (e.contains("exclude"))
        for (const auto& x : e.at("exclude")) c.encoding.exclude.insert(x.get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(e.what());
  }
  if (c.reference_window_days < 0) throw ConfigInvalid("reference_window_days must be >= 0");
  if (c.embedding.dim < 1) throw ConfigInvalid("embedding.dim must be >= 1");
  if (c.admissible_vote_results.empty()) throw ConfigInvalid("admissible_vote_results is empty");
  for (const auto& [pos, r] : c.position_rank_dict)
    if (r < 0 || r > c.rank_max)
      throw ConfigInvalid("position rank for '" + pos + "' outside [0, rank_max]");
  return c;
}

inline CountryConfig load_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigInvalid(path + ": " + e.what());
  }
  return config_from_json(j, std::filesystem::path(path).parent_path().string());
}

}  // namespace vpf
