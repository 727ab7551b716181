// Copyright 2026 The VPF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include <gtest/gtest.h>

#include "support/repair_cases.hpp"
#include "vpf/vpf.hpp"

namespace {

using namespace vpf;
using repair_cases::day;

// ---------------------------------------------------------------------------
// Affiliation
// ---------------------------------------------------------------------------

const std::vector<CoalitionEntry> kTable = {{24, "North", true}, {24, "South", false}, {25, "South", true}};

TEST(Affiliation, TableLookup) {
  EXPECT_TRUE(compute_affiliation("North", 24, kTable));
  EXPECT_FALSE(compute_affiliation("South", 24, kTable));
  EXPECT_TRUE(compute_affiliation(" south ", 25, kTable));
}

TEST(Affiliation, DefaultWhenMissing) {
  EXPECT_TRUE(compute_affiliation("East", 24, kTable, true));
  EXPECT_FALSE(compute_affiliation("North", 25, kTable, false));
}

TEST(Affiliation, MissingEntryWithoutDefault) {
  EXPECT_THROW(compute_affiliation("East", 24, kTable), MissingCoalitionEntry);
}

// ---------------------------------------------------------------------------
// Importance rank
// ---------------------------------------------------------------------------

TEST(ImportanceRank, Examples) {
  const std::map<std::string, int> dict = {
      {"prime minister", 10}, {"minister", 7}, {"deputy speaker", 5}, {"speaker", 8}, {"committee chair", 3}};
  EXPECT_EQ(compute_importance_rank("Prime Minister", dict, 10), 10);
  EXPECT_EQ(compute_importance_rank("Backbencher", dict, 10), 0);
  EXPECT_EQ(compute_importance_rank("", dict, 10), 0);
  EXPECT_EQ(compute_importance_rank("Deputy Speaker; Committee Chair", dict, 10), 5);
  EXPECT_EQ(compute_importance_rank("Ministerial adviser", dict, 10), 0);
  EXPECT_EQ(compute_importance_rank("Minister of Health, Speaker", dict, 10), 8);
}

TEST(ImportanceRank, BoundedProperty) {
  Rng rng(3);
  const std::vector<std::string> words = {"chair", "deputy", "minister", "of", "prime", "speaker", ";", ","};
  const std::map<std::string, int> dict = {{"chair", 2}, {"deputy", 1}, {"minister", 6}, {"prime minister", 9}};
  for (int t = 0; t < 300; ++t) {
    std::string pos;
    for (std::size_t k = 0; k < rng.below(6); ++k) pos += words[rng.below(words.size())] + " ";
    const int r = compute_importance_rank(pos, dict, 9);
    EXPECT_GE(r, 0);
    EXPECT_LE(r, 9);
  }
}

// ---------------------------------------------------------------------------
// Opinion count
// ---------------------------------------------------------------------------

ProtocolRecord meeting(const char* id, const char* date, std::vector<std::string> who, const char* text) {
  ProtocolRecord p;
  p.meeting_id = id;
  p.parliament_number = 1;
  p.committee_id = "C1";
  p.date = day(date);
  p.attendees = std::move(who);
  p.description = text;
  return p;
}

BillRecord titled(const char* id, const char* title) {
  BillRecord b;
  b.bill_id = id;
  b.parliament_number = 1;
  b.title = title;
  return b;
}

TEST(OpinionCount, CarbonTaxExample) {
  const auto bill = titled("B1", "Carbon tax exemption");
  const std::vector<ProtocolRecord> ps = {
      meeting("P1", "2020-03-01", {"M1", "M2"}, "The carbon levy and a tax exemption were discussed."),
      meeting("P2", "2020-05-01", {"M1"}, "Carbon carbon carbon after the vote."),
      meeting("P3", "2020-03-02", {"M2"}, "Tax tax."),
  };
  const Date vote = *day("2020-04-01");
  EXPECT_EQ(compute_opinion_count("M1", bill, ps, {}, vote), 3);
  EXPECT_EQ(compute_opinion_count("M2", bill, ps, {}, vote), 5);
  EXPECT_EQ(compute_opinion_count("M9", bill, ps, {}, vote), 0);
}

TEST(OpinionCount, SameDayMeetingExcluded) {
  const auto bill = titled("B1", "Water rights");
  const std::vector<ProtocolRecord> ps = {meeting("P1", "2020-04-01", {"M1"}, "water water")};
  EXPECT_EQ(compute_opinion_count("M1", bill, ps, {}, *day("2020-04-01")), 0);
  EXPECT_EQ(compute_opinion_count("M1", bill, ps, {}, *day("2020-04-02")), 2);
}

TEST(OpinionCount, StopwordsAndShortTokens) {
  EXPECT_EQ(subject_terms("The Law on Tax of an Act", {"the", "law"}), (std::vector<std::string>{"act", "tax"}));
  const auto bill = titled("B1", "The law");
  const std::vector<ProtocolRecord> ps = {meeting("P1", "2020-01-01", {"M1"}, "the law the law")};
  EXPECT_EQ(compute_opinion_count("M1", bill, ps, {"the", "law"}, *day("2021-01-01")), 0);
}

TEST(OpinionCount, WindowLimitsLookBack) {
  const auto bill = titled("B1", "Budget");
  const std::vector<ProtocolRecord> ps = {meeting("P1", "2019-01-01", {"M1"}, "budget"),
                                          meeting("P2", "2020-03-01", {"M1"}, "budget budget")};
  const Date vote = *day("2020-04-01");
  EXPECT_EQ(compute_opinion_count("M1", bill, ps, {}, vote, 0), 3);
  EXPECT_EQ(compute_opinion_count("M1", bill, ps, {}, vote, 365), 2);
}

// Later vote dates never lower the unbounded count, and the posting index
// agrees with the direct scan for both window settings.
TEST(OpinionCount, PropertyMonotoneAndIndexAgrees) {
  Rng rng(8);
  const std::vector<std::string> vocab = {"tax", "water", "school", "road", "health", "the"};
  const std::vector<std::string> members = {"M1", "M2", "M3"};
  for (int t = 0; t < 40; ++t) {
    std::vector<ProtocolRecord> ps;
    for (int k = 0; k < 12; ++k) {
      ProtocolRecord p;
      p.meeting_id = "P" + std::to_string(k);
      p.date = Date::from_days(18000 + static_cast<std::int32_t>(rng.below(900)));
      for (const auto& m : members)
        if (rng.uniform() < 0.5) p.attendees.push_back(m);
      for (std::size_t w = 0; w < 1 + rng.below(8); ++w) p.description += vocab[rng.below(vocab.size())] + " ";
      ps.push_back(p);
    }
    const auto bill = titled("B", (vocab[rng.below(vocab.size())] + " " + vocab[rng.below(vocab.size())]).c_str());
    const OpinionIndex index(ps, {"the"});
    const auto terms = subject_terms(bill.title, {"the"});
    for (const auto& m : members) {
      int prev = 0;
      for (std::int32_t d = 17990; d <= 18950; d += 37) {
        const Date vd = Date::from_days(d);
        const int c = compute_opinion_count(m, bill, ps, {"the"}, vd);
        EXPECT_GE(c, prev);
        prev = c;
        EXPECT_EQ(index.count(m, terms, vd, 0), c);
        EXPECT_EQ(index.count(m, terms, vd, 365), compute_opinion_count(m, bill, ps, {"the"}, vd, 365));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Embedding
// ---------------------------------------------------------------------------

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x * x;
  return std::sqrt(s);
}

TEST(Embedding, EmptyTextIsZero) {
  const auto v = text::embed_text("  ,; ", 16, 1);
  EXPECT_EQ(norm(v), 0.0);
  EXPECT_EQ(v.size(), 16U);
}

TEST(Embedding, DeterministicAndOrderInvariant) {
  EXPECT_EQ(text::embed_text("clean water act", 32, 4), text::embed_text("clean water act", 32, 4));
  EXPECT_EQ(text::embed_text("clean water act", 32, 4), text::embed_text("act WATER clean", 32, 4));
  EXPECT_NE(text::embed_text("clean water act", 32, 4), text::embed_text("clean water act", 32, 5));
}

TEST(Embedding, UnitNormProperty) {
  Rng rng(12);
  for (int t = 0; t < 200; ++t) {
    std::string s;
    for (std::size_t k = 0; k < 1 + rng.below(10); ++k) s += "w" + std::to_string(rng.below(50)) + " ";
    const int dim = 1 + static_cast<int>(rng.below(40));
    EXPECT_NEAR(norm(text::embed_text(s, dim, t)), 1.0, 1e-12) << s;
  }
}

TEST(Embedding, DescriptionPreferredOverTitle) {
  auto b = titled("B1", "Roads");
  const HashedEmbedder e(8, 1);
  const auto by_title = e.embed(b);
  b.description = "Schools and teachers";
  EXPECT_NE(e.embed(b), by_title);
  EXPECT_EQ(e.embed(b), text::embed_text("Schools and teachers", 8, 1));
}

TEST(Embedding, PrecomputedLookup) {
  const auto e = PrecomputedEmbedder::from_csv("bill_id,v0,v1\nB1,0.5,-1\nB2,0,2\n");
  EXPECT_EQ(e.dim(), 2);
  EXPECT_EQ(e.embed(titled("B1", "x")), (std::vector<double>{0.5, -1.0}));
  EXPECT_THROW(e.embed(titled("B3", "x")), EmbeddingFileMissingKey);
  EXPECT_THROW(PrecomputedEmbedder::from_csv("id,v0\nB1,1\n"), ParseError);
  EXPECT_THROW(PrecomputedEmbedder::from_csv("bill_id,v0\nB1,abc\n"), ParseError);
}

// ---------------------------------------------------------------------------
// Enrichment
// ---------------------------------------------------------------------------

// 10 votes by 3 members on 2 bills, with one vote whose session has no bill.
struct SmallWorld {
  RawBundle bundle;
  CountryConfig config;

  SmallWorld() {
    using repair_cases::member;
    using repair_cases::vote;
    bundle.members = {member("M1", 1, "Ada", "Levi", Gender::kFemale, "Blue"),
                      member("M2", 1, "Ben", "Katz", Gender::kMale, "Red"),
                      member("M3", 1, "Cy", "Dor", Gender::kMale, "Red")};
    bundle.members[0].position = "Minister of Finance";
    auto b1 = titled("S1", "Carbon tax exemption");
    b1.committee_id = "C1";
    b1.date = day("2020-01-01");
    auto b2 = titled("S2", "School meals");
    b2.committee_id = "C2";
    b2.date = day("2020-02-01");
    bundle.bills = {b1, b2};
    bundle.protocols = {meeting("P1", "2020-01-10", {"M1", "M2"}, "carbon tax talk"),
                        meeting("P2", "2020-01-20", {"M1", "M2", "M3"}, "tax exemption"),
                        meeting("P3", "2020-02-10", {"M3"}, "school meals school")};
    bundle.protocols[2].committee_id = "C2";
    const char* members[] = {"M1", "M2", "M3"};
    for (int k = 0; k < 9; ++k) {
      auto v = vote(k < 6 ? "V1" : "V2", members[k % 3], k < 6 ? "2020-01-15" : "2020-02-15", "", "");
      if (k >= 3 && k < 6) {
        v.vote_id = "V1b";
        v.vote_date = day("2020-01-25");
      }
      v.session_id = k < 6 ? "S1" : "S2";
      v.party_name = k % 3 == 0 ? "Blue" : "Red";
      v.vote_result = k % 3 == 2 ? VoteResult::kAgainst : VoteResult::kFor;
      bundle.votes.push_back(v);
    }
    auto orphan = vote("V3", "M1", "2020-03-01", "Ada Levi", "Blue");
    orphan.session_id = "S9";
    bundle.votes.push_back(orphan);
    config.country = "Testland";
    config.parliament_type = "Unicameral";
    config.coalition_table = {{1, "Blue", true}, {1, "Red", false}};
    config.position_rank_dict = {{"minister", 7}};
    config.rank_max = 10;
    config.reference_window_days = 0;
    config.admissible_vote_results = {VoteResult::kFor, VoteResult::kAgainst};
  }
};

TEST(Enrich, HandFixture) {
  const SmallWorld w;
  const HashedEmbedder emb(8, 3);
  const auto out = build_enriched(w.bundle, w.config, emb);
  ASSERT_EQ(out.records.size(), 10U);
  EXPECT_EQ(out.coverage.n_votes, 10U);
  EXPECT_EQ(out.coverage.member_joined, 10U);
  EXPECT_EQ(out.coverage.bill_joined, 9U);
  EXPECT_DOUBLE_EQ(out.coverage.bill_join(), 0.9);

  const auto& r0 = out.records[0];  // M1 on S1, 2020-01-15
  EXPECT_EQ(r0.importance_rank, 7);
  EXPECT_TRUE(r0.is_in_alliance);
  EXPECT_EQ(r0.reference_count, 2);  // P1: carbon, tax
  EXPECT_EQ(r0.attendee_count, 2);   // P1 is the latest C1 meeting on or before the vote
  EXPECT_EQ(r0.gender, Gender::kFemale);

  const auto& r3 = out.records[3];  // M1 on S1, 2020-01-25
  EXPECT_EQ(r3.reference_count, 4);
  EXPECT_EQ(r3.attendee_count, 3);

  const auto& r5 = out.records[5];  // M3 on S1, 2020-01-25
  EXPECT_FALSE(r5.is_in_alliance);
  EXPECT_EQ(r5.reference_count, 2);
  EXPECT_EQ(r5.importance_rank, 0);

  const auto& r8 = out.records[8];  // M3 on S2, 2020-02-15
  EXPECT_EQ(r8.reference_count, 3);
  EXPECT_EQ(r8.attendee_count, 1);

  const auto& orphan = out.records[9];
  EXPECT_FALSE(orphan.has_bill);
  EXPECT_FALSE(orphan.reference_count.has_value());
  EXPECT_FALSE(orphan.bill_embedding);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(out.records[i].vote, w.bundle.votes[i]);
}

TEST(Enrich, HalfBillJoin) {
  SmallWorld w;
  // Votes 1, 3, 5 and 7 lose their bill; vote 9 never had one.
  for (std::size_t i = 1; i < 9; i += 2) w.bundle.votes[i].session_id = "nowhere";
  const auto out = build_enriched(w.bundle, w.config, HashedEmbedder(4, 1));
  EXPECT_DOUBLE_EQ(out.coverage.bill_join(), 0.5);
}

TEST(Enrich, VoteIdLink) {
  SmallWorld w;
  w.config.bill_link = BillLink::kVoteId;
  w.bundle.bills[0].bill_id = "V1";
  const auto out = build_enriched(w.bundle, w.config, HashedEmbedder(4, 1));
  EXPECT_EQ(out.coverage.bill_joined, 3U);
}

TEST(Enrich, MissingCoalitionIsCounted) {
  SmallWorld w;
  w.config.coalition_table.pop_back();
  auto out = build_enriched(w.bundle, w.config, HashedEmbedder(4, 1));
  EXPECT_EQ(out.coverage.affiliation_missing, 6U);
  EXPECT_FALSE(out.records[1].is_in_alliance);
  w.config.coalition_default = true;
  out = build_enriched(w.bundle, w.config, HashedEmbedder(4, 1));
  EXPECT_EQ(out.coverage.affiliation_defaulted, 6U);
  EXPECT_TRUE(out.records[1].is_in_alliance);
}

TEST(Enrich, RowCountEqualsVotesProperty) {
  Rng rng(4);
  for (int t = 0; t < 30; ++t) {
    SmallWorld w;
    std::vector<RawVoteRecord> votes;
    for (const auto& v : w.bundle.votes)
      for (std::size_t k = 0; k < rng.below(3); ++k) votes.push_back(v);
    w.bundle.votes = votes;
    const auto out = build_enriched(w.bundle, w.config, HashedEmbedder(4, 1));
    EXPECT_EQ(out.records.size(), votes.size());
  }
}

TEST(Enrich, CsvRoundTrip) {
  const SmallWorld w;
  const auto out = build_enriched(w.bundle, w.config, HashedEmbedder(4, 1));
  const auto text = format_enriched(out.records);
  EXPECT_EQ(format_enriched(read_enriched(text)), text);
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

EnrichedRecord rec(const char* vid, const char* mid, const char* party, const char* name, const char* title,
                   VoteResult r, std::optional<int> total_for) {
  EnrichedRecord e;
  e.vote.country = "T";
  e.vote.vote_id = vid;
  e.vote.member_id = mid;
  e.vote.parliament_number = 3;
  e.vote.vote_date = day("2020-01-01");
  e.vote.party_name = party;
  e.vote.member_name = name;
  e.vote.total_for = total_for;
  e.vote.vote_result = r;
  e.title = title;
  e.importance_rank = 2;
  return e;
}

TEST(Encode, FiveRecordsByHand) {
  const std::vector<EnrichedRecord> rs = {
      rec("V1", "A", "Red", "Ann", "Tax", VoteResult::kFor, 3),
      rec("V1", "B", "Blue", "Bob", "Tax", VoteResult::kAgainst, 3),
      rec("V2", "A", "Red", "Ann", "", VoteResult::kFor, std::nullopt),
      rec("V2", "C", "", "Cat", "", VoteResult::kAbstain, std::nullopt),
      rec("V3", "B", "Blue", "Bob", "Roads", VoteResult::kFor, 1),
  };
  const auto m = encode_features(rs, EncodingOptions{});
  const std::vector<std::string> names = {
      "parliament_number", "total_for", "total_for_is_missing", "total_against", "total_against_is_missing",
      "importance_rank", "is_in_alliance", "is_current", "is_current_is_missing", "attendee_count",
      "attendee_count_is_missing", "count_of_references", "count_of_references_is_missing", "country",
      "party_name", "member_name", "title", "committee_id", "gender"};
  ASSERT_EQ(m.column_names(), names);
  ASSERT_EQ(m.n, 5U);
  // Dictionaries are sorted distinct values, codes start at 1.
  const std::vector<std::vector<double>> expect = {
      {3, 3, 0, 0, 1, 2, 0, 0, 1, 0, 1, 0, 1, 1, 2, 1, 2, 0, 0},
      {3, 3, 0, 0, 1, 2, 0, 0, 1, 0, 1, 0, 1, 1, 1, 2, 2, 0, 0},
      {3, 0, 1, 0, 1, 2, 0, 0, 1, 0, 1, 0, 1, 1, 2, 1, 0, 0, 0},
      {3, 0, 1, 0, 1, 2, 0, 0, 1, 0, 1, 0, 1, 1, 0, 3, 0, 0, 0},
      {3, 1, 0, 0, 1, 2, 0, 0, 1, 0, 1, 0, 1, 1, 1, 2, 1, 0, 0},
  };
  for (std::size_t i = 0; i < 5; ++i) {
    const auto row = m.row(i);
    EXPECT_EQ(std::vector<double>(row.begin(), row.end()), expect[i]) << i;
  }
  EXPECT_EQ(m.y, (std::vector<int>{1, 2, 1, 3, 1}));
  EXPECT_EQ(m.classes, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(m.row_keys[3].str(), "V2|C");
}

TEST(Encode, SamePartySameCodeAndUnseenIsZero) {
  const std::vector<EnrichedRecord> rs = {rec("V1", "A", "Red", "Ann", "T", VoteResult::kFor, 1),
                                          rec("V1", "B", "Red", "Bob", "T", VoteResult::kFor, 1)};
  const auto m = encode_features(rs, EncodingOptions{});
  const auto col = 14U;
  EXPECT_EQ(m.at(0, col), m.at(1, col));
  const std::vector<EnrichedRecord> fresh = {rec("V9", "Z", "Green", "Zed", "T", VoteResult::kFor, 1)};
  const auto p = encode_features(fresh, EncodingOptions{}, &m.dictionaries);
  EXPECT_EQ(p.at(0, col), 0.0);
  EXPECT_EQ(p.at(0, 16), 1.0);
}

TEST(Encode, DecodeRoundTrip) {
  const SmallWorld w;
  const auto e = build_enriched(w.bundle, w.config, HashedEmbedder(4, 1));
  EncodingOptions o;
  o.embedding_dim = 4;
  const auto m = encode_features(e.records, o);
  const auto names = m.column_names();
  for (std::size_t j = 0; j < m.p; ++j) {
    if (m.columns[j].kind != ColumnKind::kCategoricalCode) continue;
    for (std::size_t i = 0; i < m.n; ++i) {
      const int c = static_cast<int>(m.at(i, j));
      if (c == 0) continue;
      const auto v = m.dictionaries.decode(names[j], c);
      ASSERT_TRUE(v.has_value());
      EXPECT_EQ(m.dictionaries.code_of(names[j], *v), c);
    }
  }
  EXPECT_EQ(Dictionaries::from_json(m.dictionaries.to_json()).values, m.dictionaries.values);
}

TEST(Encode, EmbeddingColumnsAndMissingFlag) {
  const SmallWorld w;
  const auto e = build_enriched(w.bundle, w.config, HashedEmbedder(4, 1));
  EncodingOptions o;
  o.embedding_dim = 4;
  const auto m = encode_features(e.records, o);
  const auto names = m.column_names();
  EXPECT_EQ(names[13], "bill_embedding_is_missing");
  EXPECT_EQ(names.back(), "emb_3");
  EXPECT_EQ(m.at(9, 13), 1.0);
  EXPECT_EQ(m.at(0, 13), 0.0);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(m.at(0, m.p - 4 + k), (*e.records[0].bill_embedding)[k]);
}

TEST(Encode, PolicyOptions) {
  const SmallWorld w;
  const auto e = build_enriched(w.bundle, w.config, HashedEmbedder(4, 1));
  EncodingOptions o;
  o.policy.parliament_number_categorical = true;
  o.policy.exclude = {"member_name", "total_for"};
  const auto m = encode_features(e.records, o);
  const auto names = m.column_names();
  EXPECT_EQ(names.front(), "total_against");
  EXPECT_EQ(names.back(), "parliament_number");
  EXPECT_EQ(std::count(names.begin(), names.end(), "member_name"), 0);
}

TEST(Encode, LabelsOutsideClassesViolateContract) {
  const std::vector<EnrichedRecord> rs = {rec("V1", "A", "Red", "Ann", "T", VoteResult::kAbstain, 1)};
  EncodingOptions o;
  o.classes = {1, 2};
  EXPECT_THROW(encode_features(rs, o), ContractViolation);
  EXPECT_THROW(encode_features({}, EncodingOptions{}), EmptyInput);
}

TEST(Encode, UndatedRowsSkipped) {
  auto rs = std::vector<EnrichedRecord>{rec("V1", "A", "Red", "Ann", "T", VoteResult::kFor, 1),
                                        rec("V2", "A", "Red", "Ann", "T", VoteResult::kFor, 1)};
  rs[0].vote.vote_date.reset();
  EXPECT_EQ(encode_features(rs, EncodingOptions{}).n, 1U);
}

TEST(Matrix, BinaryRoundTrip) {
  const SmallWorld w;
  const auto e = build_enriched(w.bundle, w.config, HashedEmbedder(4, 1));
  EncodingOptions o;
  o.embedding_dim = 4;
  o.classes = {1, 2};
  const auto m = encode_features(e.records, o);
  const auto back = deserialize_matrix(serialize_matrix(m), column_spec_json(m), m.dictionaries.to_json());
  EXPECT_EQ(back.x, m.x);
  EXPECT_EQ(back.y, m.y);
  EXPECT_EQ(back.row_keys, m.row_keys);
  EXPECT_EQ(back.row_dates, m.row_dates);
  EXPECT_EQ(back.columns, m.columns);
  EXPECT_EQ(back.classes, m.classes);
  EXPECT_EQ(column_spec_hash(back), column_spec_hash(m));
}

TEST(Matrix, SpecMismatchRejected) {
  const SmallWorld w;
  const auto e = build_enriched(w.bundle, w.config, HashedEmbedder(4, 1));
  const auto m = encode_features(e.records, EncodingOptions{});
  auto spec = column_spec_json(m);
  spec["columns"][0]["name"] = "renamed";
  EXPECT_THROW(deserialize_matrix(serialize_matrix(m), spec, m.dictionaries.to_json()), ContractViolation);
  EXPECT_THROW(deserialize_matrix("nope", column_spec_json(m), m.dictionaries.to_json()), ParseError);
  const auto bytes = serialize_matrix(m);
  EXPECT_THROW(deserialize_matrix(bytes.substr(0, bytes.size() - 3), column_spec_json(m), m.dictionaries.to_json()),
               ParseError);
}

}  // namespace
