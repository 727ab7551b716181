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

#include <filesystem>

#include <gtest/gtest.h>

#include "support/repair_cases.hpp"
#include "vpf/vpf.hpp"

namespace {

using namespace vpf;
namespace fs = std::filesystem;

const fs::path kSource = VPF_SOURCE_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vpf_ingest_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

class GoldenCountry : public ::testing::TestWithParam<std::string> {};

TEST_P(GoldenCountry, CanonicalCsvMatchesGolden) {
  const fs::path dir = kSource / "tests/fixtures" / GetParam();
  const fs::path golden = kSource / "tests/golden" / GetParam();
  const auto config = load_config((dir / "config.json").string());
  const RawBundle b = ingest_country(dir.string(), config);
  EXPECT_TRUE(b.rejects.empty());
  EXPECT_EQ(format_canonical(b.members, DatasetKind::kMembers), read_file((golden / "members.csv").string()));
  EXPECT_EQ(format_canonical(b.bills, DatasetKind::kBills), read_file((golden / "bills.csv").string()));
  EXPECT_EQ(format_canonical(b.votes, DatasetKind::kVotes), read_file((golden / "votes.csv").string()));
  EXPECT_EQ(format_canonical(b.protocols, DatasetKind::kProtocols), read_file((golden / "protocols.csv").string()));
}

INSTANTIATE_TEST_SUITE_P(Fixtures, GoldenCountry, ::testing::Values("alpha", "beta", "gamma"));

TEST(ParseDataset, DelimitedMembersThreeRows) {
  const fs::path dir = scratch("members3");
  write_file((dir / "m.csv").string(), "id,parl,first,last,party\nA,1,Ann,Lee,X\nB,1,Bo,Ray,Y\nC,2,Cy,Fox,X\n");
  const auto c = config_from_json(nlohmann::json::parse(R"({
    "country": "T",
    "datasets": {"members": {"file": "m.csv",
      "field_map": {"id": "person_id", "parl": "parliament_number", "first": "first_name", "last": "last_name",
                    "party": "party"}}}})"));
  const auto parsed = parse_dataset<DatasetKind::kMembers>((dir / "m.csv").string(), c);
  EXPECT_EQ(parsed.rows.size(), 3U);
  EXPECT_TRUE(parsed.rejects.empty());
  EXPECT_EQ(parsed.rows[2].full_name(), "Cy Fox");
  EXPECT_EQ(parsed.rows[2].parliament_number, 2);
  EXPECT_EQ(parsed.rows[0].gender, Gender::kUnknown);
}

TEST(ParseDataset, UnknownTokenGoesToRejects) {
  const fs::path dir = scratch("token9");
  write_file((dir / "v.json").string(),
             R"([{"v":"V1","p":1,"s":"B1","d":"2020-01-01","m":"M1","n":"A","pn":"X","r":"1"},
                 {"v":"V1","p":1,"s":"B1","d":"2020-01-01","m":"M2","n":"B","pn":"X","r":"9"},
                 {"v":"V1","p":1,"s":"B1","d":"2020-01-01","m":"M3","n":"C","pn":"X","r":"2"}])");
  auto c = config_from_json(nlohmann::json::parse(R"({
    "country": "T",
    "datasets": {"votes": {"file": "v.json", "format": "json_records",
      "field_map": {"v": "vote_id", "p": "parliament_number", "s": "session_id", "d": "vote_date",
                    "m": "member_id", "n": "member_name", "pn": "party_name", "r": "vote_result"}}},
    "vote_tokens": {"1": 1, "2": 2}})"));
  const auto parsed = parse_dataset<DatasetKind::kVotes>((dir / "v.json").string(), c);
  ASSERT_EQ(parsed.rows.size(), 2U);
  ASSERT_EQ(parsed.rejects.size(), 1U);
  EXPECT_EQ(parsed.rejects[0].source_row, 2U);
  EXPECT_NE(parsed.rejects[0].reason.find("UnknownVoteToken"), std::string::npos);
}

TEST(ParseDataset, InadmissibleResultRejected) {
  const fs::path dir = scratch("inadmissible");
  write_file((dir / "v.csv").string(), "v,p,s,d,m,n,pn,r\nV1,1,B,2020-01-01,M1,A,X,1\nV1,1,B,2020-01-01,M2,B,X,4\n");
  auto c = config_from_json(nlohmann::json::parse(R"({
    "country": "T", "admissible_vote_results": ["For", "Against"],
    "datasets": {"votes": {"file": "v.csv",
      "field_map": {"v": "vote_id", "p": "parliament_number", "s": "session_id", "d": "vote_date",
                    "m": "member_id", "n": "member_name", "pn": "party_name", "r": "vote_result"}}}})"));
  const auto parsed = parse_dataset<DatasetKind::kVotes>((dir / "v.csv").string(), c);
  EXPECT_EQ(parsed.rows.size(), 1U);
  ASSERT_EQ(parsed.rejects.size(), 1U);
  EXPECT_NE(parsed.rejects[0].reason.find("Inadmissible"), std::string::npos);
}

TEST(ParseDataset, ODataValueEnvelope) {
  const fs::path dir = kSource / "tests/fixtures/gamma";
  const auto c = load_config((dir / "config.json").string());
  const auto parsed = parse_dataset<DatasetKind::kMembers>((dir / "members.json").string(), c);
  EXPECT_EQ(parsed.rows.size(), 2U);
  EXPECT_TRUE(parsed.rejects.empty());
}

TEST(ParseDataset, HtmlTableExport) {
  const fs::path dir = scratch("html");
  write_file((dir / "p.html").string(),
             "<html><body><p>intro</p><TABLE><tr><th>Id</th><th>Parl</th><th>Com</th><th>Title</th>"
             "<th>Date</th><th>Text</th><th>Who</th><th>Chair</th></tr>\n"
             "<tr><td>P1</td><td>2</td><td>C1</td><td><b>Budget</b> &amp; tax</td><td>01.02.2020</td>"
             "<td>Tax&nbsp;talk</td><td>M1, M2</td><td>M1</td></tr></TABLE></body></html>");
  auto c = config_from_json(nlohmann::json::parse(R"({
    "country": "T",
    "datasets": {"protocols": {"file": "p.html", "format": "html_table_export", "date_formats": ["%d.%m.%Y"],
      "field_map": {"Id": "meeting_id", "Parl": "parliament_number", "Com": "committee_id", "Title": "meeting_title",
                    "Date": "date", "Text": "description", "Who": "attendees", "Chair": "speaker_name"}}}})"));
  const auto parsed = parse_dataset<DatasetKind::kProtocols>((dir / "p.html").string(), c);
  ASSERT_EQ(parsed.rows.size(), 1U);
  const auto& p = parsed.rows[0];
  EXPECT_EQ(p.meeting_title, "Budget & tax");
  EXPECT_EQ(p.description, "Tax talk");
  EXPECT_EQ(p.date->iso(), "2020-02-01");
  EXPECT_EQ(p.attendees, (std::vector<std::string>{"M1", "M2"}));
}

TEST(ParseDataset, PatternExtraction) {
  const fs::path dir = kSource / "tests/fixtures/gamma";
  const auto c = load_config((dir / "config.json").string());
  const auto parsed = parse_dataset<DatasetKind::kVotes>((dir / "votes.json").string(), c);
  ASSERT_FALSE(parsed.rows.empty());
  EXPECT_EQ(parsed.rows[0].member_id, "101");
}

TEST(ParseDataset, Errors) {
  EXPECT_THROW(config_from_json(nlohmann::json::parse(
                   R"({"country":"T","datasets":{"votes":{"file":"v.xml","format":"xml"}}})")),
               UnsupportedFormat);
  const auto full = config_from_json(nlohmann::json::parse(R"({
    "country": "T",
    "datasets": {"votes": {"file": "v.csv",
      "field_map": {"v": "vote_id", "p": "parliament_number", "s": "session_id", "d": "vote_date",
                    "m": "member_id", "n": "member_name", "pn": "party_name", "r": "vote_result"}}}})"));
  EXPECT_THROW(parse_dataset<DatasetKind::kVotes>("/nonexistent/v.csv", full), FileUnreadable);
  const auto partial = config_from_json(nlohmann::json::parse(
      R"({"country":"T","datasets":{"votes":{"file":"v.csv","field_map":{"a":"vote_id"}}}})"));
  EXPECT_THROW(parse_dataset<DatasetKind::kVotes>("/nonexistent/v.csv", partial), SchemaFieldUnmapped);
  const auto bad_target = config_from_json(nlohmann::json::parse(
      R"({"country":"T","datasets":{"votes":{"file":"v.csv","field_map":{"a":"nope"}}}})"));
  EXPECT_THROW(parse_dataset<DatasetKind::kVotes>("/nonexistent/v.csv", bad_target), ConfigInvalid);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"datasets":{}})")), ConfigInvalid);
}

TEST(Ingest, Deterministic) {
  const fs::path dir = kSource / "data/demo";
  const auto c = load_config((dir / "config.json").string());
  const auto overrides = parse_overrides(read_file((dir / "overrides.csv").string()));
  const auto a = repair_missing(ingest_country(dir.string(), c), overrides);
  const auto b = repair_missing(ingest_country(dir.string(), c), overrides);
  EXPECT_EQ(format_canonical(a.votes, DatasetKind::kVotes), format_canonical(b.votes, DatasetKind::kVotes));
  EXPECT_EQ(format_repair_log(a.repair_log), format_repair_log(b.repair_log));
  EXPECT_EQ(a.votes.size(), 200U);
  EXPECT_TRUE(a.unresolved_missing.empty());
}

TEST(Ingest, DemoMixedFormats) {
  const fs::path dir = kSource / "data/demo";
  const auto c = load_config((dir / "config.json").string());
  const auto b = ingest_country(dir.string(), c);
  EXPECT_EQ(b.votes.size(), 200U);
  EXPECT_FALSE(b.members.empty());
  EXPECT_FALSE(b.bills.empty());
  EXPECT_FALSE(b.protocols.empty());
  std::size_t missing_party = 0;
  for (const auto& v : b.votes) missing_party += v.party_name.empty();
  EXPECT_GT(missing_party, 0U);
}

// ---------------------------------------------------------------------------
// Repair
// ---------------------------------------------------------------------------

class RepairCase : public ::testing::TestWithParam<std::size_t> {};

TEST_P(RepairCase, MatchesHandLog) {
  const auto cases = repair_cases::all();
  const auto& c = cases.at(GetParam());
  EXPECT_EQ(repair_cases::check(c), "") << c.name;
}

INSTANTIATE_TEST_SUITE_P(Twenty, RepairCase, ::testing::Range<std::size_t>(0, 20));

TEST(Repair, CaseCount) { EXPECT_EQ(repair_cases::all().size(), 20U); }

TEST(Repair, OverrideFileValidation) {
  EXPECT_THROW(parse_overrides("a,b,c\n"), OverrideFileMalformed);
  EXPECT_THROW(parse_overrides("dataset,row_key,field,value\nvotes,V1|M1,nope,1\n"), OverrideFileMalformed);
  EXPECT_THROW(parse_overrides("dataset,row_key,field,value\nlaws,V1,vote_date,1\n"), OverrideFileMalformed);
  EXPECT_TRUE(parse_overrides("").empty());
  const auto ok = parse_overrides("dataset,row_key,field,value\nvotes,V1|M1,party_name,Blue\n");
  ASSERT_EQ(ok.size(), 1U);
  EXPECT_EQ(ok[0].value, "Blue");
}

TEST(Repair, BadOverrideValue) {
  auto b = repair_cases::base_members();
  b.votes = {repair_cases::vote("V1", "M1", "", "Ada Levi", "Blue", Gender::kFemale)};
  const auto o = parse_overrides("dataset,row_key,field,value\nvotes,V1|M1,vote_date,yesterday\n");
  EXPECT_THROW(repair_missing(b, o), OverrideFileMalformed);
}

// Conservation: random gaps never remove rows, and every logged fill is
// re-derivable from the pre-repair bundle.
TEST(Repair, PropertyConservationAndRederivation) {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    RawBundle b = repair_cases::base_members();
    const char* members[] = {"M1", "M2", "M7"};
    for (int v = 0; v < 6; ++v) {
      const std::string vid = "V" + std::to_string(v + 1);
      const std::string date = "2020-01-0" + std::to_string(1 + v / 2);
      for (const char* m : members) {
        auto rec = repair_cases::vote(vid.c_str(), m, date.c_str(), "N", "P");
        if (rng.uniform() < 0.2) rec.vote_date.reset();
        if (rng.uniform() < 0.2) rec.member_name.clear();
        if (rng.uniform() < 0.2) rec.party_name.clear();
        b.votes.push_back(rec);
      }
    }
    const auto out = repair_missing(b);
    ASSERT_EQ(out.votes.size(), b.votes.size());
    for (std::size_t i = 0; i < b.votes.size(); ++i) {
      if (b.votes[i].vote_date) EXPECT_EQ(out.votes[i].vote_date, b.votes[i].vote_date);
      if (!b.votes[i].member_name.empty()) EXPECT_EQ(out.votes[i].member_name, b.votes[i].member_name);
    }
    for (const auto& e : out.repair_log) {
      const auto expect = oracle::rederive(e, b, {});
      ASSERT_TRUE(expect.has_value()) << e.row_key << " " << e.field;
      EXPECT_EQ(*expect, e.new_value);
    }
  }
}

TEST(Repair, LogFormats) {
  std::vector<RepairLogEntry> log = {{"votes", "V1|M1", "party_name", "cross_join", "", "Red, Inc"}};
  EXPECT_EQ(format_repair_log(log), "dataset,row_key,field,method,old,new\nvotes,V1|M1,party_name,cross_join,,\"Red, Inc\"\n");
  EXPECT_EQ(format_rejects({{"votes", 3, "BadDate(vote_date)"}}), "dataset,source_row,reason\nvotes,3,BadDate(vote_date)\n");
}

}  // namespace
