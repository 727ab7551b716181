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

// Canonical parliamentary record types, the vote-result code table, bundle
// validation, and the canonical CSV layout of each dataset.

#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "vpf/common.hpp"
#include "vpf/csv.hpp"

namespace vpf {

// ---------------------------------------------------------------------------
// Vote results
// ---------------------------------------------------------------------------

enum class VoteResult : int {
  kFor = 1,
  kAgainst = 2,
  kAbstain = 3,
  kDidNotVote = 4,
  kObstruction = 5,
};

inline constexpr std::array<VoteResult, 5> kAllVoteResults = {
    VoteResult::kFor, VoteResult::kAgainst, VoteResult::kAbstain,
    VoteResult::kDidNotVote, VoteResult::kObstruction};

inline constexpr int code(VoteResult r) { return static_cast<int>(r); }

inline std::optional<VoteResult> vote_result_from_code(long long c) {
  if (c < 1 || c > 5) return std::nullopt;
  return static_cast<VoteResult>(c);
}

inline std::string_view label(VoteResult r) {
  switch (r) {
    case VoteResult::kFor: return "For";
    case VoteResult::kAgainst: return "Against";
    case VoteResult::kAbstain: return "Abstain";
    case VoteResult::kDidNotVote: return "DidNotVote";
    case VoteResult::kObstruction: return "Obstruction";
  }
  return "?";
}

/// Country vote-token map, keyed by case-folded trimmed token.
class VoteTokenMap {
 public:
  VoteTokenMap() = default;
  VoteTokenMap(std::initializer_list<std::pair<std::string, VoteResult>> entries) {
    for (const auto& [token, result] : entries) add(token, result);
  }

  void add(std::string_view token, VoteResult result) {
    tokens_[fold_case(trim(token))] = result;
  }

  std::optional<VoteResult> find(std::string_view token) const {
    const auto it = tokens_.find(fold_case(trim(token)));
    if (it == tokens_.end()) return std::nullopt;
    return it->second;
  }

  /// The numeric code table 1..5.
  static VoteTokenMap numeric() {
    VoteTokenMap m;
    for (const VoteResult r : kAllVoteResults) m.add(std::to_string(code(r)), r);
    return m;
  }

  const std::map<std::string, VoteResult>& entries() const { return tokens_; }

 private:
  std::map<std::string, VoteResult> tokens_;
};

/// Maps a raw source token onto the canonical result. The country map is
/// consulted first; canonical labels ("For", "Did Not Vote", ...) are always
/// accepted so the function is idempotent on its own output.
inline VoteResult canonicalize_vote_result(std::string_view raw_token, const VoteTokenMap& mapping) {
  if (const auto hit = mapping.find(raw_token)) return *hit;
  std::string squeezed;
  for (const char c : fold_case(trim(raw_token)))
    if (c != ' ' && c != '_' && c != '-') squeezed.push_back(c);
  for (const VoteResult r : kAllVoteResults)
    if (fold_case(label(r)) == squeezed) return r;
  throw UnknownVoteToken("'" + std::string(raw_token) + "'");
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

enum class Gender { kMale, kFemale, kUnknown };

inline std::string_view label(Gender g) {
  switch (g) {
    case Gender::kMale: return "Male";
    case Gender::kFemale: return "Female";
    case Gender::kUnknown: return "Unknown";
  }
  return "Unknown";
}

inline Gender parse_gender(std::string_view raw) {
  const std::string v = fold_case(trim(raw));
  if (v == "m" || v == "male" || v == "man") return Gender::kMale;
  if (v == "f" || v == "female" || v == "woman") return Gender::kFemale;
  return Gender::kUnknown;
}

struct MemberProfile {
  std::string person_id;
  int parliament_number = 0;
  std::string first_name;
  std::string last_name;
  Gender gender = Gender::kUnknown;
  std::string email;
  std::string party;
  std::string position;

  std::string full_name() const {
    if (first_name.empty()) return last_name;
    if (last_name.empty()) return first_name;
    return first_name + " " + last_name;
  }
  std::string row_key() const { return person_id + "|" + std::to_string(parliament_number); }
  friend bool operator==(const MemberProfile&, const MemberProfile&) = default;
};

struct BillRecord {
  std::string bill_id;
  int parliament_number = 0;
  std::string title;
  std::string committee_id;
  std::optional<Date> date;
  std::string description;
  std::string speaker_name;

  std::string row_key() const { return bill_id; }
  friend bool operator==(const BillRecord&, const BillRecord&) = default;
};

struct ProtocolRecord {
  std::string meeting_id;
  int parliament_number = 0;
  std::string committee_id;
  std::string meeting_title;
  std::optional<Date> date;
  std::string description;
  std::vector<std::string> attendees;
  std::optional<int> attendee_count;
  std::string speaker_name;

  std::string row_key() const { return meeting_id; }
  friend bool operator==(const ProtocolRecord&, const ProtocolRecord&) = default;
};

struct RawVoteRecord {
  std::string country;
  std::string vote_id;
  int parliament_number = 0;
  std::string session_id;
  std::optional<Date> vote_date;
  std::optional<int> total_for;
  std::optional<int> total_against;
  std::string member_id;
  std::string member_name;
  std::string party_id;
  std::string party_name;
  Gender member_gender = Gender::kUnknown;
  std::optional<bool> is_current;
  VoteResult vote_result = VoteResult::kFor;

  std::string row_key() const { return vote_id + "|" + member_id; }
  friend bool operator==(const RawVoteRecord&, const RawVoteRecord&) = default;
};

enum class DatasetKind { kMembers, kBills, kVotes, kProtocols };

inline std::string_view name(DatasetKind k) {
  switch (k) {
    case DatasetKind::kMembers: return "members";
    case DatasetKind::kBills: return "bills";
    case DatasetKind::kVotes: return "votes";
    case DatasetKind::kProtocols: return "protocols";
  }
  return "?";
}

inline std::optional<DatasetKind> dataset_from_name(std::string_view n) {
  for (const auto k : {DatasetKind::kMembers, DatasetKind::kBills, DatasetKind::kVotes, DatasetKind::kProtocols})
    if (name(k) == n) return k;
  return std::nullopt;
}

struct RepairLogEntry {
  std::string dataset;
  std::string row_key;
  std::string field;
  std::string method;  // cross_join | neighbor | manual | derived
  std::string old_value;
  std::string new_value;
  friend bool operator==(const RepairLogEntry&, const RepairLogEntry&) = default;
};

struct RejectEntry {
  std::string dataset;
  std::size_t source_row = 0;  // 1-based data row index in the source file
  std::string reason;
  friend bool operator==(const RejectEntry&, const RejectEntry&) = default;
};

/// The four per-country datasets after parsing.
struct RawBundle {
  std::vector<MemberProfile> members;
  std::vector<BillRecord> bills;
  std::vector<RawVoteRecord> votes;
  std::vector<ProtocolRecord> protocols;
  std::vector<RepairLogEntry> repair_log;
  std::vector<RejectEntry> rejects;
  /// "dataset.field" -> count of values still missing after repair.
  std::map<std::string, std::size_t> unresolved_missing;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct DatasetIssues {
  std::size_t duplicates = 0;
  std::size_t missing_dates = 0;
  std::size_t dates_out_of_range = 0;
  std::size_t dangling_refs = 0;
  std::size_t missing_fields = 0;

  std::size_t total() const {
    return duplicates + missing_dates + dates_out_of_range + dangling_refs + missing_fields;
  }
  friend bool operator==(const DatasetIssues&, const DatasetIssues&) = default;
};

struct ValidationReport {
  DatasetIssues members;
  DatasetIssues bills;
  DatasetIssues votes;
  DatasetIssues protocols;
  std::vector<std::string> tally_mismatch;  // vote_ids, sorted
  std::size_t attendee_count_mismatch = 0;

  std::size_t duplicates() const {
    return members.duplicates + bills.duplicates + votes.duplicates + protocols.duplicates;
  }
  std::size_t total() const {
    return members.total() + bills.total() + votes.total() + protocols.total() +
           tally_mismatch.size() + attendee_count_mismatch;
  }
  bool ok() const { return total() == 0; }
};

struct YearRange {
  int start = 0;
  int end = 9999;
  bool contains(Date d) const {
    const int y = d.ymd().year;
    return y >= start && y <= end;
  }
};

/// Counts invariant violations per dataset. Never mutates the bundle.
inline ValidationReport validate_bundle(const RawBundle& bundle, std::optional<YearRange> years = std::nullopt) {
  ValidationReport rep;

  std::unordered_set<std::string> member_ids;
  {
    std::unordered_set<std::string> keys;
    for (const auto& m : bundle.members) {
      member_ids.insert(m.person_id);
      if (!keys.insert(m.row_key()).second) ++rep.members.duplicates;
      if (m.person_id.empty() || m.parliament_number < 1) ++rep.members.missing_fields;
    }
  }
  const auto check_date = [&](const std::optional<Date>& d, DatasetIssues& issues) {
    if (!d) {
      ++issues.missing_dates;
    } else if (years && !years->contains(*d)) {
      ++issues.dates_out_of_range;
    }
  };
  {
    std::unordered_set<std::string> keys;
    for (const auto& b : bundle.bills) {
      if (!keys.insert(b.bill_id).second) ++rep.bills.duplicates;
      if (b.bill_id.empty() || b.title.empty()) ++rep.bills.missing_fields;
      check_date(b.date, rep.bills);
      if (!b.speaker_name.empty() && !member_ids.count(b.speaker_name)) ++rep.bills.dangling_refs;
    }
  }
  {
    std::unordered_set<std::string> keys;
    for (const auto& p : bundle.protocols) {
      if (!keys.insert(p.meeting_id).second) ++rep.protocols.duplicates;
      if (p.meeting_id.empty()) ++rep.protocols.missing_fields;
      check_date(p.date, rep.protocols);
      for (const auto& a : p.attendees)
        if (!member_ids.count(a)) ++rep.protocols.dangling_refs;
      if (!p.attendee_count || *p.attendee_count != static_cast<int>(p.attendees.size()))
        ++rep.attendee_count_mismatch;
    }
  }
  {
    std::unordered_set<std::string> keys;
    struct Tally {
      int n_for = 0, n_against = 0;
      bool mismatch = false;
      std::vector<std::pair<int, int>> declared;
    };
    std::map<std::string, Tally> tallies;
    for (const auto& v : bundle.votes) {
      if (!keys.insert(v.row_key()).second) ++rep.votes.duplicates;
      if (v.vote_id.empty() || v.member_id.empty() || v.member_name.empty() || v.party_name.empty())
        ++rep.votes.missing_fields;
      check_date(v.vote_date, rep.votes);
      if (!member_ids.count(v.member_id)) ++rep.votes.dangling_refs;
      auto& t = tallies[v.vote_id];
      if (v.vote_result == VoteResult::kFor) ++t.n_for;
      if (v.vote_result == VoteResult::kAgainst) ++t.n_against;
      if (v.total_for && v.total_against) t.declared.emplace_back(*v.total_for, *v.total_against);
    }
    for (const auto& [vote_id, t] : tallies) {
      for (const auto& [f, a] : t.declared) {
        if (f != t.n_for || a != t.n_against) {
          rep.tally_mismatch.push_back(vote_id);
          break;
        }
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Canonical CSV layout
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& canonical_columns(DatasetKind k) {
  static const std::vector<std::string> kMembers = {
      "person_id", "parliament_number", "first_name", "last_name",
      "gender", "email", "party", "position"};
  static const std::vector<std::string> kBills = {
      "bill_id", "parliament_number", "title", "committee_id",
      "date", "description", "speaker_name"};
  static const std::vector<std::string> kVotes = {
      "country", "vote_id", "parliament_number", "session_id", "vote_date",
      "total_for", "total_against", "member_id", "member_name", "party_id",
      "party_name", "member_gender", "is_current", "vote_result"};
  static const std::vector<std::string> kProtocols = {
      "meeting_id", "parliament_number", "committee_id", "meeting_title", "date",
      "description", "attendees", "attendee_count", "speaker_name"};
  switch (k) {
    case DatasetKind::kMembers: return kMembers;
    case DatasetKind::kBills: return kBills;
    case DatasetKind::kVotes: return kVotes;
    case DatasetKind::kProtocols: return kProtocols;
  }
  return kMembers;
}

namespace detail {

inline std::string opt_str(const std::optional<Date>& d) { return d ? d->iso() : std::string(); }
inline std::string opt_str(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }
inline std::string opt_str(const std::optional<bool>& v) { return v ? (*v ? "true" : "false") : std::string(); }
inline std::string gender_str(Gender g) { return std::string(label(g)); }

inline std::optional<Date> read_date(const std::string& s) {
  if (s.empty()) return std::nullopt;
  auto d = parse_iso_date(s);
  if (!d) throw ParseError("bad ISO date '" + s + "'");
  return d;
}
inline std::optional<int> read_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  auto v = parse_int(s);
  if (!v) throw ParseError("bad integer '" + s + "'");
  return static_cast<int>(*v);
}
inline std::optional<bool> read_bool(const std::string& s) {
  if (s.empty()) return std::nullopt;
  auto v = parse_bool(s);
  if (!v) throw ParseError("bad boolean '" + s + "'");
  return v;
}

inline void require_header(const csv::Table& t, DatasetKind k) {
  if (t.header != canonical_columns(k))
    throw ParseError("canonical " + std::string(name(k)) + " header mismatch");
}

}  // namespace detail

inline std::vector<std::string> to_row(const MemberProfile& m) {
  return {m.person_id, std::to_string(m.parliament_number), m.first_name, m.last_name,
          detail::gender_str(m.gender), m.email, m.party, m.position};
}
inline std::vector<std::string> to_row(const BillRecord& b) {
  return {b.bill_id, std::to_string(b.parliament_number), b.title, b.committee_id,
          detail::opt_str(b.date), b.description, b.speaker_name};
}
inline std::vector<std::string> to_row(const ProtocolRecord& p) {
  return {p.meeting_id, std::to_string(p.parliament_number), p.committee_id, p.meeting_title,
          detail::opt_str(p.date), p.description, join(p.attendees, ";"),
          detail::opt_str(p.attendee_count), p.speaker_name};
}
inline std::vector<std::string> to_row(const RawVoteRecord& v) {
  return {v.country, v.vote_id, std::to_string(v.parliament_number), v.session_id,
          detail::opt_str(v.vote_date), detail::opt_str(v.total_for), detail::opt_str(v.total_against),
          v.member_id, v.member_name, v.party_id, v.party_name, detail::gender_str(v.member_gender),
          detail::opt_str(v.is_current), std::to_string(code(v.vote_result))};
}

template <class Record>
std::string format_canonical(const std::vector<Record>& rows, DatasetKind k) {
  std::string out;
  out.reserve(rows.size() * 96 + 128);
  csv::append_row(out, canonical_columns(k));
  for (const auto& r : rows) csv::append_row(out, to_row(r));
  return out;
}

inline std::vector<MemberProfile> read_canonical_members(std::string_view data) {
  const auto t = csv::parse_table(data);
  detail::require_header(t, DatasetKind::kMembers);
  std::vector<MemberProfile> out;
  for (const auto& r : t.rows) {
    MemberProfile m;
    m.person_id = r.at(0);
    m.parliament_number = detail::read_int(r.at(1)).value_or(0);
    m.first_name = r.at(2);
    m.last_name = r.at(3);
    m.gender = parse_gender(r.at(4));
    m.email = r.at(5);
    m.party = r.at(6);
    m.position = r.at(7);
    out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<BillRecord> read_canonical_bills(std::string_view data) {
  const auto t = csv::parse_table(data);
  detail::require_header(t, DatasetKind::kBills);
  std::vector<BillRecord> out;
  for (const auto& r : t.rows) {
    BillRecord b;
    b.bill_id = r.at(0);
    b.parliament_number = detail::read_int(r.at(1)).value_or(0);
    b.title = r.at(2);
    b.committee_id = r.at(3);
    b.date = detail::read_date(r.at(4));
    b.description = r.at(5);
    b.speaker_name = r.at(6);
    out.push_back(std::move(b));
  }
  return out;
}

inline std::vector<ProtocolRecord> read_canonical_protocols(std::string_view data) {
  const auto t = csv::parse_table(data);
  detail::require_header(t, DatasetKind::kProtocols);
  std::vector<ProtocolRecord> out;
  for (const auto& r : t.rows) {
    ProtocolRecord p;
    p.meeting_id = r.at(0);
    p.parliament_number = detail::read_int(r.at(1)).value_or(0);
    p.committee_id = r.at(2);
    p.meeting_title = r.at(3);
    p.date = detail::read_date(r.at(4));
    p.description = r.at(5);
    if (!r.at(6).empty()) p.attendees = split(r.at(6), ';');
    p.attendee_count = detail::read_int(r.at(7));
    p.speaker_name = r.at(8);
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<RawVoteRecord> read_canonical_votes(std::string_view data) {
  std::vector<RawVoteRecord> out;
  csv::Reader reader(data);
  std::vector<std::string> r;
  if (!reader.next(r) || r != canonical_columns(DatasetKind::kVotes))
    throw ParseError("canonical votes header mismatch");
  while (reader.next(r)) {
    if (r.size() != 14) throw ParseError("votes row width at line " + std::to_string(reader.line()));
    RawVoteRecord v;
    v.country = std::move(r[0]);
    v.vote_id = std::move(r[1]);
    v.parliament_number = detail::read_int(r[2]).value_or(0);
    v.session_id = std::move(r[3]);
    v.vote_date = detail::read_date(r[4]);
    v.total_for = detail::read_int(r[5]);
    v.total_against = detail::read_int(r[6]);
    v.member_id = std::move(r[7]);
    v.member_name = std::move(r[8]);
    v.party_id = std::move(r[9]);
    v.party_name = std::move(r[10]);
    v.member_gender = parse_gender(r[11]);
    v.is_current = detail::read_bool(r[12]);
    const auto c = detail::read_int(r[13]);
    const auto vr = c ? vote_result_from_code(*c) : std::nullopt;
    if (!vr) throw ParseError("bad vote_result '" + r[13] + "'");
    v.vote_result = *vr;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace vpf
