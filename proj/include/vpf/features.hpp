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

// Enrichment of vote rows with member, bill and protocol context, the four
// engineered features (coalition alignment, position rank, subject reference
// count, bill text embedding), and numeric encoding into a FeatureMatrix.

#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "vpf/common.hpp"
#include "vpf/config.hpp"
#include "vpf/csv.hpp"
#include "vpf/schema.hpp"
#include "vpf/text.hpp"

namespace vpf {

// ---------------------------------------------------------------------------
// Political affiliation
// ---------------------------------------------------------------------------

inline std::optional<bool> lookup_coalition(std::string_view party_name, int parliament_number,
                                            const std::vector<CoalitionEntry>& table) {
  const std::string key = fold_case(trim(party_name));
  for (const auto& e : table)
    if (e.parliament_number == parliament_number && fold_case(trim(e.party_name)) == key) return e.in_coalition;
  return std::nullopt;
}

/// True iff the party is listed as a coalition member for that parliament.
/// Falls back to `default_value` (with a warning) when the table has no row.
inline bool compute_affiliation(std::string_view party_name, int parliament_number,
                                const std::vector<CoalitionEntry>& table,
                                std::optional<bool> default_value = std::nullopt) {
  if (const auto hit = lookup_coalition(party_name, parliament_number, table)) return *hit;
  if (!default_value)
    throw MissingCoalitionEntry("party '" + std::string(party_name) + "' in parliament " +
                                std::to_string(parliament_number));
  log(LogLevel::kDebug, "no coalition entry for '" + std::string(party_name) + "' in parliament " +
                            std::to_string(parliament_number) + "; using default");
  return *default_value;
}

// ---------------------------------------------------------------------------
// Importance rank
// ---------------------------------------------------------------------------

/// Rank of a position text. The text is split into roles on ; , / |; each
/// role takes the value of its longest matching dictionary phrase (whole
/// words, case-insensitive) and the result is the maximum over roles.
/// Unmatched positions rank 0.
inline int compute_importance_rank(std::string_view position, const std::map<std::string, int>& rank_dict,
                                   int rank_max) {
  const auto is_word = [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || std::isalnum(u);
  };
  const std::string folded = fold_case(position);
  std::vector<std::string> roles;
  std::string cur;
  for (const char c : folded) {
    if (c == ';' || c == ',' || c == '/' || c == '|') {
      roles.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  roles.push_back(cur);

  int best = 0;
  for (const auto& role_raw : roles) {
    const std::string role(trim(role_raw));
    if (role.empty()) continue;
    std::size_t best_len = 0;
    int role_rank = 0;
    for (const auto& [phrase, value] : rank_dict) {
      if (phrase.empty()) continue;
      for (std::size_t pos = role.find(phrase); pos != std::string::npos; pos = role.find(phrase, pos + 1)) {
        const bool left = pos == 0 || !is_word(role[pos - 1]);
        const std::size_t end = pos + phrase.size();
        const bool right = end == role.size() || !is_word(role[end]);
        if (left && right) {
          if (phrase.size() > best_len || (phrase.size() == best_len && value > role_rank)) {
            best_len = phrase.size();
            role_rank = value;
          }
          break;
        }
      }
    }
    best = std::max(best, role_rank);
  }
  return std::clamp(best, 0, rank_max);
}

// ---------------------------------------------------------------------------
// Opinion on subject
// ---------------------------------------------------------------------------

/// Case-folded title tokens minus stopwords and tokens shorter than three
/// characters; sorted, unique.
inline std::vector<std::string> subject_terms(std::string_view title, const std::vector<std::string>& stopwords) {
  const std::set<std::string> stop(stopwords.begin(), stopwords.end());
  std::set<std::string> terms;
  for (auto& t : text::tokenize(title))
    if (text::codepoints(t) >= 3 && !stop.count(t)) terms.insert(std::move(t));
  return {terms.begin(), terms.end()};
}

/// Total occurrences of the bill's subject terms in protocols the member
/// attended strictly before `vote_date` and, when `window_days` > 0, no more
/// than `window_days` days before it.
inline int compute_opinion_count(std::string_view member_id, const BillRecord& bill,
                                 const std::vector<ProtocolRecord>& protocols,
                                 const std::vector<std::string>& stopwords, Date vote_date, int window_days = 0) {
  const auto terms = subject_terms(bill.title, stopwords);
  if (terms.empty()) return 0;
  const std::set<std::string> term_set(terms.begin(), terms.end());
  int count = 0;
  for (const auto& p : protocols) {
    if (!p.date || !(*p.date < vote_date)) continue;
    if (window_days > 0 && p.date->days() < vote_date.days() - window_days) continue;
    if (std::find(p.attendees.begin(), p.attendees.end(), member_id) == p.attendees.end()) continue;
    for (const auto& tok : text::tokenize(p.description))
      if (term_set.count(tok)) ++count;
  }
  return count;
}

/// Precomputed postings for fast reference counting over many votes:
/// (member, term) -> date-sorted cumulative occurrence counts.
class OpinionIndex {
 public:
  OpinionIndex(const std::vector<ProtocolRecord>& protocols, const std::vector<std::string>& stopwords)
      : stopwords_(stopwords) {
    for (const auto& p : protocols) {
      if (!p.date || p.attendees.empty() || p.description.empty()) continue;
      std::map<std::string, int> counts;
      for (auto& tok : text::tokenize(p.description)) ++counts[std::move(tok)];
      std::set<std::string> attendees(p.attendees.begin(), p.attendees.end());
      for (const auto& a : attendees) {
        auto& by_term = postings_[a];
        for (const auto& [term, c] : counts) by_term[term].push_back({p.date->days(), c});
      }
    }
    for (auto& [member, by_term] : postings_) {
      for (auto& [term, list] : by_term) {
        std::sort(list.begin(), list.end(), [](const Posting& a, const Posting& b) { return a.day < b.day; });
        long long run = 0;
        for (auto& e : list) {
          run += e.count;
          e.count = run;
        }
      }
    }
  }

  long long count(const std::string& member_id, const std::vector<std::string>& terms, Date vote_date,
                  int window_days = 0) const {
    const auto m = postings_.find(member_id);
    if (m == postings_.end()) return 0;
    long long total = 0;
    for (const auto& t : terms) {
      const auto it = m->second.find(t);
      if (it == m->second.end()) continue;
      const auto& list = it->second;
      const auto before = [&](std::int32_t day) -> long long {
        const auto pos = std::lower_bound(list.begin(), list.end(), day,
                                          [](const Posting& e, std::int32_t d) { return e.day < d; });
        return pos == list.begin() ? 0 : std::prev(pos)->count;
      };
      total += before(vote_date.days());
      if (window_days > 0) total -= before(vote_date.days() - window_days);
    }
    return total;
  }

  const std::vector<std::string>& stopwords() const { return stopwords_; }

 private:
  struct Posting {
    std::int32_t day;
    long long count;
  };
  std::vector<std::string> stopwords_;
  std::unordered_map<std::string, std::unordered_map<std::string, std::vector<Posting>>> postings_;
};

// ---------------------------------------------------------------------------
// Bill embedding
// ---------------------------------------------------------------------------

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual int dim() const = 0;
  virtual std::vector<double> embed(const BillRecord& bill) const = 0;
};

/// Text used for a bill's embedding: its description, else its title.
inline std::string_view embedding_text(const BillRecord& bill) {
  return bill.description.empty() ? std::string_view(bill.title) : std::string_view(bill.description);
}

class HashedEmbedder final : public Embedder {
 public:
  HashedEmbedder(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}
  int dim() const override { return dim_; }
  std::vector<double> embed(const BillRecord& bill) const override {
    return text::embed_text(embedding_text(bill), dim_, seed_);
  }

 private:
  int dim_;
  std::uint64_t seed_;
};

/// Externally computed vectors keyed by bill_id (CSV: bill_id,v0..v{D-1}).
class PrecomputedEmbedder final : public Embedder {
 public:
  explicit PrecomputedEmbedder(std::map<std::string, std::vector<double>> vectors) : vectors_(std::move(vectors)) {
    dim_ = vectors_.empty() ? 0 : static_cast<int>(vectors_.begin()->second.size());
    for (const auto& [id, v] : vectors_)
      if (static_cast<int>(v.size()) != dim_) throw ParseError("embedding for '" + id + "' has inconsistent width");
  }

  static PrecomputedEmbedder from_csv(std::string_view data) {
    const auto t = csv::parse_table(data);
    if (t.header.empty() || t.header[0] != "bill_id") throw ParseError("embeddings file must start with bill_id");
    std::map<std::string, std::vector<double>> vectors;
    for (const auto& r : t.rows) {
      std::vector<double> v;
      for (std::size_t i = 1; i < r.size(); ++i) {
        char* end = nullptr;
        v.push_back(std::strtod(r[i].c_str(), &end));
        if (r[i].empty() || *end != '\0') throw ParseError("bad embedding value '" + r[i] + "'");
      }
      vectors[r.at(0)] = std::move(v);
    }
    return PrecomputedEmbedder(std::move(vectors));
  }

  int dim() const override { return dim_; }
  std::vector<double> embed(const BillRecord& bill) const override {
    const auto it = vectors_.find(bill.bill_id);
    if (it == vectors_.end()) throw EmbeddingFileMissingKey(bill.bill_id);
    return it->second;
  }

 private:
  std::map<std::string, std::vector<double>> vectors_;
  int dim_ = 0;
};

/// Embedder selected by the country config (precomputed file when set).
inline std::unique_ptr<Embedder> make_embedder(const CountryConfig& config,
                                               const std::string& embeddings_override = "") {
  std::string file = embeddings_override;
  if (file.empty() && !config.embedding.precomputed_file.empty())
    file = (std::filesystem::path(config.base_dir) / config.embedding.precomputed_file).string();
  if (file.empty()) return std::make_unique<HashedEmbedder>(config.embedding.dim, config.embedding.seed);
  return std::make_unique<PrecomputedEmbedder>(PrecomputedEmbedder::from_csv(read_file(file)));
}

// ---------------------------------------------------------------------------
// Enriched dataset
// ---------------------------------------------------------------------------

struct EnrichedRecord {
  RawVoteRecord vote;
  std::string parliament_type;
  // Member profile join.
  bool has_member = false;
  Gender gender = Gender::kUnknown;
  std::string email;
  std::string member_party;
  int importance_rank = 0;
  bool is_in_alliance = false;
  // Bill / protocol join.
  bool has_bill = false;
  std::string bill_id;
  std::string title;
  std::string committee_id;
  std::string speaker_name;
  std::shared_ptr<const std::vector<std::string>> attendees;
  std::optional<int> attendee_count;
  std::optional<int> reference_count;
  std::shared_ptr<const std::vector<double>> bill_embedding;

  VoteResult label() const { return vote.vote_result; }
  std::string row_key() const { return vote.row_key(); }
};

struct JoinCoverage {
  std::size_t n_votes = 0;
  std::size_t member_joined = 0;
  std::size_t bill_joined = 0;
  std::size_t protocol_joined = 0;
  std::size_t affiliation_defaulted = 0;
  std::size_t affiliation_missing = 0;

  double member_join() const { return n_votes ? static_cast<double>(member_joined) / n_votes : 0.0; }
  double bill_join() const { return n_votes ? static_cast<double>(bill_joined) / n_votes : 0.0; }
  double protocol_join() const { return n_votes ? static_cast<double>(protocol_joined) / n_votes : 0.0; }
};

struct EnrichedDataset {
  std::vector<EnrichedRecord> records;
  JoinCoverage coverage;
  int embedding_dim = 0;
};

/// Left-joins votes with members, bills and protocols and computes the
/// engineered features. Output has exactly one record per vote row, in vote
/// order.
inline EnrichedDataset build_enriched(const RawBundle& bundle, const CountryConfig& config, const Embedder& embedder) {
  EnrichedDataset out;
  out.embedding_dim = embedder.dim();
  auto& cov = out.coverage;
  cov.n_votes = bundle.votes.size();

  std::unordered_map<std::string, const MemberProfile*> members;
  for (const auto& m : bundle.members) members.emplace(m.row_key(), &m);
  std::unordered_map<std::string, const BillRecord*> bills;
  for (const auto& b : bundle.bills) bills.emplace(b.bill_id, &b);

  // Committee -> date-sorted protocols.
  std::unordered_map<std::string, std::vector<const ProtocolRecord*>> by_committee;
  for (const auto& p : bundle.protocols)
    if (p.date && !p.committee_id.empty()) by_committee[p.committee_id].push_back(&p);
  for (auto& [c, list] : by_committee)
    std::stable_sort(list.begin(), list.end(), [](const ProtocolRecord* a, const ProtocolRecord* b) {
      return *a->date < *b->date;
    });
  std::unordered_map<const ProtocolRecord*, std::shared_ptr<const std::vector<std::string>>> attendee_cache;

  const OpinionIndex opinions(bundle.protocols, config.stopwords);

  struct BillCache {
    std::shared_ptr<const std::vector<double>> embedding;
    std::vector<std::string> terms;
  };
  std::unordered_map<std::string, BillCache> bill_cache;
  std::map<std::pair<int, std::string>, bool> affiliation_cache;

  out.records.reserve(bundle.votes.size());
  for (const auto& v : bundle.votes) {
    EnrichedRecord r;
    r.vote = v;
    r.parliament_type = config.parliament_type;

    const auto mit = members.find(v.member_id + "|" + std::to_string(v.parliament_number));
    if (mit != members.end()) {
      const MemberProfile& m = *mit->second;
      r.has_member = true;
      ++cov.member_joined;
      r.gender = m.gender;
      r.email = m.email;
      r.member_party = m.party;
      r.importance_rank = compute_importance_rank(m.position, config.position_rank_dict, config.rank_max);
    }
    if (r.gender == Gender::kUnknown) r.gender = v.member_gender;

    const std::string& party = v.party_name.empty() ? r.member_party : v.party_name;
    const auto akey = std::make_pair(v.parliament_number, party);
    auto ait = affiliation_cache.find(akey);
    if (ait == affiliation_cache.end()) {
      bool value = false;
      if (const auto hit = lookup_coalition(party, v.parliament_number, config.coalition_table)) {
        value = *hit;
      } else if (config.coalition_default) {
        value = *config.coalition_default;
        log(LogLevel::kWarn, "no coalition entry for party '" + party + "' in parliament " +
                                 std::to_string(v.parliament_number) + "; using default");
      } else {
        log(LogLevel::kWarn, "MissingCoalitionEntry: party '" + party + "' in parliament " +
                                 std::to_string(v.parliament_number) + "; treated as not in alliance");
      }
      ait = affiliation_cache.emplace(akey, value).first;
    }
    r.is_in_alliance = ait->second;
    if (!lookup_coalition(party, v.parliament_number, config.coalition_table)) {
      if (config.coalition_default) {
        ++cov.affiliation_defaulted;
      } else {
        ++cov.affiliation_missing;
      }
    }

    const std::string& link = config.bill_link == BillLink::kSessionId ? v.session_id : v.vote_id;
    const auto bit = bills.find(link);
    if (bit != bills.end()) {
      const BillRecord& b = *bit->second;
      r.has_bill = true;
      ++cov.bill_joined;
      r.bill_id = b.bill_id;
      r.title = b.title;
      r.committee_id = b.committee_id;
      r.speaker_name = b.speaker_name;
      auto cit = bill_cache.find(b.bill_id);
      if (cit == bill_cache.end()) {
        BillCache bc;
        bc.embedding = std::make_shared<const std::vector<double>>(embedder.embed(b));
        bc.terms = subject_terms(b.title, config.stopwords);
        cit = bill_cache.emplace(b.bill_id, std::move(bc)).first;
      }
      r.bill_embedding = cit->second.embedding;
      r.reference_count = v.vote_date
                              ? static_cast<int>(opinions.count(v.member_id, cit->second.terms, *v.vote_date,
                                                                 config.reference_window_days))
                              : 0;

      // The bill's committee meeting: latest one on or before the vote.
      const auto pit = by_committee.find(b.committee_id);
      if (pit != by_committee.end() && v.vote_date) {
        const auto& list = pit->second;
        const auto after = std::upper_bound(list.begin(), list.end(), *v.vote_date,
                                            [](Date d, const ProtocolRecord* p) { return d < *p->date; });
        if (after != list.begin()) {
          const ProtocolRecord* p = *std::prev(after);
          auto& shared = attendee_cache[p];
          if (!shared) shared = std::make_shared<const std::vector<std::string>>(p->attendees);
          r.attendees = shared;
          r.attendee_count = static_cast<int>(p->attendees.size());
          ++cov.protocol_joined;
        }
      }
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enriched CSV
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& enriched_columns() {
  static const std::vector<std::string> kColumns = {
      "index", "country", "vote_id", "parliament_number", "parliament_type", "session_id", "vote_date",
      "total_for", "total_against", "member_id", "member_full_name", "party_name", "gender", "email",
      "party_id", "member_party", "importance_rank", "is_in_alliance", "is_current", "bill_id", "title",
      "bill_embedding", "committee_id", "attendees", "attendee_count", "speaker_name", "count_of_references",
      "vote_result"};
  return kColumns;
}

inline std::string format_enriched(const std::vector<EnrichedRecord>& records) {
  std::string out;
  csv::append_row(out, enriched_columns());
  std::vector<std::string> row;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const auto& v = r.vote;
    std::string emb;
    if (r.bill_embedding) {
      for (std::size_t k = 0; k < r.bill_embedding->size(); ++k) {
        if (k) emb.push_back(' ');
        emb += format_double((*r.bill_embedding)[k]);
      }
    }
    row = {std::to_string(i),
           v.country,
           v.vote_id,
           std::to_string(v.parliament_number),
           r.parliament_type,
           v.session_id,
           detail::opt_str(v.vote_date),
           detail::opt_str(v.total_for),
           detail::opt_str(v.total_against),
           v.member_id,
           v.member_name,
           v.party_name,
           std::string(label(r.gender)),
           r.email,
           v.party_id,
           r.member_party,
           std::to_string(r.importance_rank),
           r.is_in_alliance ? "true" : "false",
           detail::opt_str(v.is_current),
           r.bill_id,
           r.title,
           emb,
           r.committee_id,
           r.attendees ? join(*r.attendees, ";") : std::string(),
           detail::opt_str(r.attendee_count),
           r.speaker_name,
           detail::opt_str(r.reference_count),
           std::to_string(code(v.vote_result))};
    csv::append_row(out, row);
  }
  return out;
}

inline std::vector<EnrichedRecord> read_enriched(std::string_view data) {
  std::vector<EnrichedRecord> out;
  csv::Reader reader(data);
  std::vector<std::string> r;
  if (!reader.next(r) || r != enriched_columns()) throw ParseError("enriched.csv header mismatch");
  std::unordered_map<std::string, std::shared_ptr<const std::vector<double>>> emb_cache;
  while (reader.next(r)) {
    if (r.size() != enriched_columns().size()) throw ParseError("enriched.csv row width");
    EnrichedRecord e;
    auto& v = e.vote;
    v.country = r[1];
    v.vote_id = r[2];
    v.parliament_number = detail::read_int(r[3]).value_or(0);
    e.parliament_type = r[4];
    v.session_id = r[5];
    v.vote_date = detail::read_date(r[6]);
    v.total_for = detail::read_int(r[7]);
    v.total_against = detail::read_int(r[8]);
    v.member_id = r[9];
    v.member_name = r[10];
    v.party_name = r[11];
    e.gender = parse_gender(r[12]);
    v.member_gender = e.gender;
    e.email = r[13];
    v.party_id = r[14];
    e.member_party = r[15];
    e.has_member = !e.member_party.empty() || !e.email.empty();
    e.importance_rank = detail::read_int(r[16]).value_or(0);
    e.is_in_alliance = detail::read_bool(r[17]).value_or(false);
    v.is_current = detail::read_bool(r[18]);
    e.bill_id = r[19];
    e.has_bill = !e.bill_id.empty();
    e.title = r[20];
    if (!r[21].empty()) {
      auto& slot = emb_cache[e.bill_id + "\n" + r[21]];
      if (!slot) {
        std::vector<double> vec;
        for (const auto& tok : split(r[21], ' ')) vec.push_back(std::strtod(tok.c_str(), nullptr));
        slot = std::make_shared<const std::vector<double>>(std::move(vec));
      }
      e.bill_embedding = slot;
    }
    e.committee_id = r[22];
    if (!r[23].empty()) e.attendees = std::make_shared<const std::vector<std::string>>(split(r[23], ';'));
    e.attendee_count = detail::read_int(r[24]);
    e.speaker_name = r[25];
    e.reference_count = detail::read_int(r[26]);
    const auto c = detail::read_int(r[27]);
    const auto vr = c ? vote_result_from_code(*c) : std::nullopt;
    if (!vr) throw ParseError("bad vote_result in enriched.csv");
    v.vote_result = *vr;
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature matrix
// ---------------------------------------------------------------------------

enum class ColumnKind { kNumeric, kCategoricalCode, kEmbeddingDim };

inline std::string_view name(ColumnKind k) {
  switch (k) {
    case ColumnKind::kNumeric: return "numeric";
    case ColumnKind::kCategoricalCode: return "categorical_code";
    case ColumnKind::kEmbeddingDim: return "embedding_dim";
  }
  return "?";
}

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

/// Categorical value dictionaries: sorted distinct values; code = index + 1,
/// code 0 reserved for unseen or missing.
struct Dictionaries {
  std::map<std::string, std::vector<std::string>> values;

  int code_of(const std::string& column, const std::string& value) const {
    if (value.empty()) return 0;
    const auto it = values.find(column);
    if (it == values.end()) return 0;
    const auto pos = std::lower_bound(it->second.begin(), it->second.end(), value);
    if (pos == it->second.end() || *pos != value) return 0;
    return static_cast<int>(pos - it->second.begin()) + 1;
  }

  std::optional<std::string> decode(const std::string& column, int c) const {
    const auto it = values.find(column);
    if (it == values.end() || c < 1 || c > static_cast<int>(it->second.size())) return std::nullopt;
    return it->second[static_cast<std::size_t>(c - 1)];
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [col, vals] : values) {
      nlohmann::json m = nlohmann::json::object();
      for (std::size_t i = 0; i < vals.size(); ++i) m[vals[i]] = i + 1;
      j[col] = m;
    }
    return j;
  }

  static Dictionaries from_json(const nlohmann::json& j) {
    Dictionaries d;
    for (const auto& [col, m] : j.items()) {
      std::vector<std::pair<int, std::string>> pairs;
      for (const auto& [val, c] : m.items()) pairs.emplace_back(c.get<int>(), val);
      std::sort(pairs.begin(), pairs.end());
      auto& vals = d.values[col];
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].first != static_cast<int>(i + 1)) throw ParseError("dictionary codes for '" + col + "' not dense");
        vals.push_back(pairs[i].second);
      }
      if (!std::is_sorted(vals.begin(), vals.end())) throw ParseError("dictionary for '" + col + "' not sorted");
    }
    return d;
  }
};

struct RowKey {
  std::string vote_id;
  std::string member_id;
  std::string str() const { return vote_id + "|" + member_id; }
  friend auto operator<=>(const RowKey&, const RowKey&) = default;
};

/// Dense row-major design matrix with labels, row identity and dates.
struct FeatureMatrix {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> x;  // n * p
  std::vector<int> y;     // vote-result codes
  std::vector<ColumnSpec> columns;
  Dictionaries dictionaries;
  std::vector<RowKey> row_keys;
  std::vector<Date> row_dates;
  std::vector<int> classes;  // admissible codes, ascending
  int embedding_dim = 0;

  std::span<const double> row(std::size_t i) const { return {x.data() + i * p, p}; }
  double at(std::size_t i, std::size_t j) const { return x[i * p + j]; }

  /// Rows in `idx`, in that order, sharing this matrix's columns.
  FeatureMatrix subset(const std::vector<std::size_t>& idx) const {
    FeatureMatrix out;
    out.n = idx.size();
    out.p = p;
    out.columns = columns;
    out.dictionaries = dictionaries;
    out.classes = classes;
    out.embedding_dim = embedding_dim;
    out.x.reserve(idx.size() * p);
    for (const auto i : idx) {
      out.x.insert(out.x.end(), x.begin() + static_cast<std::ptrdiff_t>(i * p),
                   x.begin() + static_cast<std::ptrdiff_t>((i + 1) * p));
      out.y.push_back(y[i]);
      out.row_keys.push_back(row_keys[i]);
      out.row_dates.push_back(row_dates[i]);
    }
    return out;
  }

  std::vector<std::string> column_names() const {
    std::vector<std::string> out;
    for (const auto& c : columns) out.push_back(c.name);
    return out;
  }
};

inline nlohmann::json column_spec_json(const FeatureMatrix& m) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : m.columns) cols.push_back({{"name", c.name}, {"kind", std::string(name(c.kind))}});
  return {{"version", 1}, {"columns", cols}, {"embedding_dim", m.embedding_dim}, {"classes", m.classes}};
}

/// Stable fingerprint of the column layout; models refuse other layouts.
inline std::string column_spec_hash(const FeatureMatrix& m) { return hex64(fnv1a64(column_spec_json(m).dump())); }

struct EncodingOptions {
  EncodingPolicy policy;
  int embedding_dim = 0;
  std::vector<int> classes;  // empty: distinct labels present
};

namespace detail {

struct NumericSource {
  std::string name;
  bool nullable;
  std::optional<double> (*get)(const EnrichedRecord&);
};

inline const std::vector<NumericSource>& numeric_sources() {
  static const std::vector<NumericSource> kSources = {
      {"parliament_number", false,
       [](const EnrichedRecord& r) -> std::optional<double> { return r.vote.parliament_number; }},
      {"total_for", true,
       [](const EnrichedRecord& r) -> std::optional<double> {
         return r.vote.total_for ? std::optional<double>(*r.vote.total_for) : std::nullopt;
       }},
      {"total_against", true,
       [](const EnrichedRecord& r) -> std::optional<double> {
         return r.vote.total_against ? std::optional<double>(*r.vote.total_against) : std::nullopt;
       }},
      {"importance_rank", false, [](const EnrichedRecord& r) -> std::optional<double> { return r.importance_rank; }},
      {"is_in_alliance", false,
       [](const EnrichedRecord& r) -> std::optional<double> { return r.is_in_alliance ? 1.0 : 0.0; }},
      {"is_current", true,
       [](const EnrichedRecord& r) -> std::optional<double> {
         return r.vote.is_current ? std::optional<double>(*r.vote.is_current ? 1.0 : 0.0) : std::nullopt;
       }},
      {"attendee_count", true,
       [](const EnrichedRecord& r) -> std::optional<double> {
         return r.attendee_count ? std::optional<double>(*r.attendee_count) : std::nullopt;
       }},
      {"count_of_references", true,
       [](const EnrichedRecord& r) -> std::optional<double> {
         return r.reference_count ? std::optional<double>(*r.reference_count) : std::nullopt;
       }},
  };
  return kSources;
}

struct CategoricalSource {
  std::string name;
  std::string (*get)(const EnrichedRecord&);
};

inline const std::vector<CategoricalSource>& categorical_sources() {
  static const std::vector<CategoricalSource> kSources = {
      {"country", [](const EnrichedRecord& r) { return r.vote.country; }},
      {"party_name", [](const EnrichedRecord& r) { return r.vote.party_name.empty() ? r.member_party : r.vote.party_name; }},
      {"member_name", [](const EnrichedRecord& r) { return r.vote.member_name; }},
      {"title", [](const EnrichedRecord& r) { return r.title; }},
      {"committee_id", [](const EnrichedRecord& r) { return r.committee_id; }},
      {"gender", [](const EnrichedRecord& r) {
         return r.gender == Gender::kUnknown ? std::string() : std::string(label(r.gender));
       }},
      {"parliament_number", [](const EnrichedRecord& r) { return std::to_string(r.vote.parliament_number); }},
  };
  return kSources;
}

}  // namespace detail

/// Encodes enriched records. With `existing` dictionaries (prediction time)
/// unseen values map to code 0; otherwise dictionaries are built from the
/// records. Rows without a vote date are skipped (they cannot be split
/// chronologically) and reported in the log.
inline FeatureMatrix encode_features(const std::vector<EnrichedRecord>& records, const EncodingOptions& options,
                                     const Dictionaries* existing = nullptr) {
  if (records.empty()) throw EmptyInput("no enriched records to encode");
  const auto& policy = options.policy;
  const auto excluded = [&](const std::string& n) { return policy.exclude.count(n) > 0; };

  FeatureMatrix m;
  m.embedding_dim = options.embedding_dim;
  std::vector<const detail::NumericSource*> numeric;
  for (const auto& s : detail::numeric_sources()) {
    if (excluded(s.name)) continue;
    if (s.name == "parliament_number" && policy.parliament_number_categorical) continue;
    numeric.push_back(&s);
    m.columns.push_back({s.name, ColumnKind::kNumeric});
    if (s.nullable) m.columns.push_back({s.name + "_is_missing", ColumnKind::kNumeric});
  }
  const bool use_embedding = !excluded("bill_embedding") && options.embedding_dim > 0;
  if (use_embedding) m.columns.push_back({"bill_embedding_is_missing", ColumnKind::kNumeric});
  std::vector<const detail::CategoricalSource*> categorical;
  for (const auto& s : detail::categorical_sources()) {
    if (excluded(s.name)) continue;
    if (s.name == "parliament_number" && !policy.parliament_number_categorical) continue;
    categorical.push_back(&s);
    m.columns.push_back({s.name, ColumnKind::kCategoricalCode});
  }
  if (use_embedding)
    for (int k = 0; k < options.embedding_dim; ++k)
      m.columns.push_back({"emb_" + std::to_string(k), ColumnKind::kEmbeddingDim});
  m.p = m.columns.size();

  if (existing) {
    m.dictionaries = *existing;
  } else {
    for (const auto* s : categorical) {
      std::set<std::string> seen;
      std::string last;
      for (const auto& r : records) {
        std::string v = s->get(r);
        if (v.empty() || v == last) continue;
        last = v;
        seen.insert(std::move(v));
      }
      m.dictionaries.values[s->name] = {seen.begin(), seen.end()};
    }
  }

  std::set<int> present;
  std::size_t skipped = 0;
  m.x.reserve(records.size() * m.p);
  for (const auto& r : records) {
    if (!r.vote.vote_date) {
      ++skipped;
      continue;
    }
    for (const auto* s : numeric) {
      const auto v = s->get(r);
      m.x.push_back(v.value_or(0.0));
      if (s->nullable) m.x.push_back(v ? 0.0 : 1.0);
    }
    if (use_embedding) m.x.push_back(r.bill_embedding ? 0.0 : 1.0);
    for (const auto* s : categorical) m.x.push_back(m.dictionaries.code_of(s->name, s->get(r)));
    if (use_embedding) {
      if (r.bill_embedding) {
        if (static_cast<int>(r.bill_embedding->size()) != options.embedding_dim)
          throw ContractViolation("embedding width " + std::to_string(r.bill_embedding->size()) +
                                  " != " + std::to_string(options.embedding_dim));
        m.x.insert(m.x.end(), r.bill_embedding->begin(), r.bill_embedding->end());
      } else {
        m.x.insert(m.x.end(), static_cast<std::size_t>(options.embedding_dim), 0.0);
      }
    }
    m.y.push_back(code(r.vote.vote_result));
    present.insert(code(r.vote.vote_result));
    m.row_keys.push_back({r.vote.vote_id, r.vote.member_id});
    m.row_dates.push_back(*r.vote.vote_date);
  }
  m.n = m.y.size();
  if (skipped) log(LogLevel::kWarn, std::to_string(skipped) + " enriched rows without vote_date left out of the matrix");
  if (m.n == 0) throw EmptyInput("no dated enriched records to encode");
  m.classes = options.classes.empty() ? std::vector<int>(present.begin(), present.end()) : options.classes;
  std::sort(m.classes.begin(), m.classes.end());
  for (const int c : present)
    if (!std::binary_search(m.classes.begin(), m.classes.end(), c))
      throw ContractViolation("label " + std::to_string(c) + " outside the admissible classes");
  return m;
}

// ---------------------------------------------------------------------------
// Binary matrix file
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
void put(std::string& out, T v) {
  const auto* b = reinterpret_cast<const char*>(&v);
  out.append(b, sizeof(T));
}

template <class T>
T take(std::string_view& in) {
  if (in.size() < sizeof(T)) throw ParseError("feature_matrix.bin truncated");
  T v;
  std::memcpy(&v, in.data(), sizeof(T));
  in.remove_prefix(sizeof(T));
  return v;
}

inline void put_str(std::string& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

inline std::string take_str(std::string_view& in) {
  const auto len = take<std::uint32_t>(in);
  if (in.size() < len) throw ParseError("feature_matrix.bin truncated");
  std::string s(in.substr(0, len));
  in.remove_prefix(len);
  return s;
}

}  // namespace detail

/// Little-endian binary layout: "VPFM", version, column_spec hash, n, p, X
/// (row-major f64), y (i32), dates (i32 days since epoch), row keys.
inline std::string serialize_matrix(const FeatureMatrix& m) {
  std::string out;
  out.reserve(m.x.size() * 8 + m.n * 32 + 64);
  out.append("VPFM");
  detail::put<std::uint32_t>(out, 1);
  detail::put_str(out, column_spec_hash(m));
  detail::put<std::uint64_t>(out, m.n);
  detail::put<std::uint64_t>(out, m.p);
  out.append(reinterpret_cast<const char*>(m.x.data()), m.x.size() * sizeof(double));
  for (const int v : m.y) detail::put<std::int32_t>(out, v);
  for (const Date d : m.row_dates) detail::put<std::int32_t>(out, d.days());
  for (const auto& k : m.row_keys) {
    detail::put_str(out, k.vote_id);
    detail::put_str(out, k.member_id);
  }
  return out;
}

/// Reads a matrix; column spec and dictionaries come from their JSON files
/// and the stored hash must match them.
inline FeatureMatrix deserialize_matrix(std::string_view in, const nlohmann::json& column_spec,
                                        const nlohmann::json& dictionaries) {
  FeatureMatrix m;
  if (in.substr(0, 4) != "VPFM") throw ParseError("not a feature matrix file");
  in.remove_prefix(4);
  if (detail::take<std::uint32_t>(in) != 1) throw ParseError("unsupported feature matrix version");
  const std::string hash = detail::take_str(in);
  m.n = detail::take<std::uint64_t>(in);
  m.p = detail::take<std::uint64_t>(in);
  try {
    for (const auto& c : column_spec.at("columns")) {
      const std::string kind = c.at("kind").get<std::string>();
      ColumnKind k = ColumnKind::kNumeric;
      if (kind == "categorical_code") k = ColumnKind::kCategoricalCode;
      else if (kind == "embedding_dim") k = ColumnKind::kEmbeddingDim;
      m.columns.push_back({c.at("name").get<std::string>(), k});
    }
    m.embedding_dim = column_spec.at("embedding_dim").get<int>();
    m.classes = column_spec.at("classes").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("column_spec.json: ") + e.what());
  }
  m.dictionaries = Dictionaries::from_json(dictionaries);
  if (m.columns.size() != m.p) throw ContractViolation("column_spec width does not match matrix");
  if (column_spec_hash(m) != hash) throw ContractViolation("column_spec hash mismatch for feature matrix");
  const std::size_t bytes = m.n * m.p * sizeof(double);
  if (in.size() < bytes) throw ParseError("feature_matrix.bin truncated");
  m.x.resize(m.n * m.p);
  std::memcpy(m.x.data(), in.data(), bytes);
  in.remove_prefix(bytes);
  m.y.resize(m.n);
  for (auto& v : m.y) v = detail::take<std::int32_t>(in);
  m.row_dates.resize(m.n);
  for (auto& d : m.row_dates) d = Date::from_days(detail::take<std::int32_t>(in));
  m.row_keys.resize(m.n);
  for (auto& k : m.row_keys) {
    k.vote_id = detail::take_str(in);
    k.member_id = detail::take_str(in);
  }
  return m;
}

}  // namespace vpf
