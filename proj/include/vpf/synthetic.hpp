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

// Synthetic parliament: parties split into coalition and opposition blocs,
// bills sponsored by one bloc with bloc-specific title vocabulary, and
// party-line voting with a defection rate. Used for demos, learnability and
// anomaly checks, and large-scale performance fixtures.

#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "vpf/common.hpp"
#include "vpf/config.hpp"
#include "vpf/csv.hpp"
#include "vpf/schema.hpp"

namespace vpf {

struct SyntheticOptions {
  std::uint64_t seed = 1;
  std::string country = "Synthetica";
  std::size_t n_members = 100;
  std::size_t n_bills = 200;
  /// Per-vote probability of leaving the party line (to either other option).
  double defection_rate = 0.10;
  int first_year = 2015;
  int last_year = 2019;
  /// Year the second parliament starts (one party changes bloc).
  int second_parliament_year = 2017;
  /// Planted defections: votes against the party line placed on or after
  /// `plant_from`, never overlapping random defections.
  std::size_t n_planted = 0;
  std::optional<Date> plant_from;
  std::size_t n_committees = 4;
  std::size_t protocol_interval_days = 14;
  int embedding_dim = 64;
};

struct SyntheticParliament {
  RawBundle bundle;
  nlohmann::json config_json;  // plain canonical-CSV layout
  std::vector<std::string> planted;  // "vote_id|member_id", sorted
  std::map<std::string, bool> bill_sponsor_is_coalition;
};

namespace detail {

inline const std::vector<std::string>& synthetic_parties() {
  static const std::vector<std::string> kParties = {"Unity",        "Progress",   "Heritage",
                                                    "Liberty",      "Green Path", "Labour Front"};
  return kParties;
}

/// Coalition parties per parliament (20 then 21): Heritage and Liberty swap.
inline bool synthetic_in_coalition(const std::string& party, int parliament) {
  if (party == "Unity" || party == "Progress") return true;
  if (party == "Heritage") return parliament == 20;
  if (party == "Liberty") return parliament == 21;
  return false;
}

}  // namespace detail

inline SyntheticParliament generate_parliament(const SyntheticOptions& opt) {
  static const std::vector<std::string> kFirst = {"Avi",  "Dana", "Eli",  "Noa",  "Omar", "Rina", "Tal",  "Yael",
                                                  "Ben",  "Lea",  "Sam",  "Maya", "Ron",  "Ella", "Gil",  "Nir"};
  static const std::vector<std::string> kLast = {"Levi", "Cohen", "Haddad", "Mizrahi", "Peretz", "Biton", "Dahan",
                                                 "Katz", "Azulay", "Friedman", "Shapiro", "Amar", "Golan", "Ben-David"};
  static const std::vector<std::string> kCoalitionWords = {"security", "budget", "infrastructure",
                                                           "defense",  "growth", "enterprise"};
  static const std::vector<std::string> kOppositionWords = {"welfare", "transparency", "housing",
                                                            "environment", "labor", "education"};
  static const std::vector<std::string> kNeutral = {"provisions", "regulation", "framework", "reform", "oversight",
                                                    "procedure", "amendment", "authority", "services", "standards"};

  Rng rng(derive_seed(opt.seed, "synthetic"));
  SyntheticParliament out;
  auto& b = out.bundle;
  const auto& parties = detail::synthetic_parties();
  const int parl_a = 20, parl_b = 21;
  const Date second = Date::from_ymd(opt.second_parliament_year, 1, 1);
  const auto parliament_of = [&](Date d) { return d < second ? parl_a : parl_b; };

  // Members: party sizes alternate larger coalition parties / smaller others.
  static const std::array<double, 6> kShare = {0.26, 0.18, 0.14, 0.14, 0.14, 0.14};
  std::vector<std::size_t> party_of(opt.n_members);
  {
    std::size_t i = 0;
    for (std::size_t p = 0; p < parties.size(); ++p) {
      const std::size_t count =
          p + 1 == parties.size() ? opt.n_members - i
                                  : static_cast<std::size_t>(kShare[p] * static_cast<double>(opt.n_members) + 0.5);
      for (std::size_t c = 0; c < count && i < opt.n_members; ++c) party_of[i++] = p;
    }
  }
  std::vector<std::string> member_ids(opt.n_members), member_names(opt.n_members);
  std::vector<Gender> genders(opt.n_members);
  for (std::size_t i = 0; i < opt.n_members; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "M%04zu", i + 1);
    member_ids[i] = id;
    const auto& fn = kFirst[rng.below(kFirst.size())];
    const auto& ln = kLast[rng.below(kLast.size())];
    member_names[i] = fn + " " + ln;
    genders[i] = rng.below(2) ? Gender::kFemale : Gender::kMale;
    std::size_t rank_in_party = 0;
    for (std::size_t j = 0; j < i; ++j) rank_in_party += party_of[j] == party_of[i];
    for (const int parl : {parl_a, parl_b}) {
      MemberProfile m;
      m.person_id = id;
      m.parliament_number = parl;
      m.first_name = fn;
      m.last_name = ln;
      m.gender = genders[i];
      m.email = fold_case(fn) + "." + std::string(id) + "@parliament.example";
      m.party = parties[party_of[i]];
      const bool coalition = detail::synthetic_in_coalition(m.party, parl);
      if (rank_in_party == 0) {
        m.position = coalition ? (party_of[i] == 0 ? "Prime Minister" : "Minister") : "Party Leader";
      } else if (rank_in_party <= 2) {
        m.position = coalition ? "Deputy Minister" : "Committee Chair";
      } else if (rank_in_party == 3) {
        m.position = "Committee Chair; Member of Parliament";
      } else {
        m.position = "Member of Parliament";
      }
      b.members.push_back(std::move(m));
    }
  }

  // Bills, evenly spread over the period with jitter.
  const Date start = Date::from_ymd(opt.first_year, 1, 1);
  const Date end = Date::from_ymd(opt.last_year, 12, 31);
  const auto span_days = static_cast<std::uint64_t>(end.days() - start.days() + 1);
  std::vector<Date> bill_dates(opt.n_bills);
  for (auto& d : bill_dates) d = Date::from_days(start.days() + static_cast<std::int32_t>(rng.below(span_days)));
  std::sort(bill_dates.begin(), bill_dates.end());
  std::vector<bool> sponsor_coalition(opt.n_bills);
  for (std::size_t i = 0; i < opt.n_bills; ++i) {
    sponsor_coalition[i] = rng.below(2) == 0;
    const auto& words = sponsor_coalition[i] ? kCoalitionWords : kOppositionWords;
    const std::string w1 = words[rng.below(words.size())];
    std::string w2 = words[rng.below(words.size())];
    if (w2 == w1) w2 = words[(std::find(words.begin(), words.end(), w1) - words.begin() + 1) % words.size()];
    const std::string nw = kNeutral[rng.below(kNeutral.size())];
    char id[32];
    std::snprintf(id, sizeof id, "B%05zu", i + 1);
    BillRecord bill;
    bill.bill_id = id;
    bill.parliament_number = parliament_of(bill_dates[i]);
    std::string t1 = w1;
    t1[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(t1[0])));
    bill.title = t1 + " and " + w2 + " " + nw + " bill";
    bill.committee_id = "C" + std::to_string(1 + rng.below(opt.n_committees));
    bill.date = bill_dates[i];
    bill.description = "A bill on " + w1 + " " + w2 + " and " + nw + " " + kNeutral[rng.below(kNeutral.size())];
    char sponsor[32];
    std::snprintf(sponsor, sizeof sponsor, "M%04zu", 1 + rng.below(opt.n_members));
    bill.speaker_name = sponsor;
    out.bill_sponsor_is_coalition[bill.bill_id] = sponsor_coalition[i];
    b.bills.push_back(std::move(bill));
  }

  // Committee protocols.
  for (std::size_t c = 0; c < opt.n_committees; ++c) {
    std::size_t seq = 0;
    for (std::int32_t day = start.days() + static_cast<std::int32_t>(c);
         day <= end.days(); day += static_cast<std::int32_t>(opt.protocol_interval_days)) {
      ProtocolRecord p;
      char id[24];
      std::snprintf(id, sizeof id, "P%zu-%04zu", c + 1, ++seq);
      p.meeting_id = id;
      const Date d = Date::from_days(day);
      p.date = d;
      p.parliament_number = parliament_of(d);
      p.committee_id = "C" + std::to_string(c + 1);
      p.meeting_title = "Committee " + std::to_string(c + 1) + " session " + std::to_string(seq);
      const bool coalition_topic = rng.below(2) == 0;
      const auto& words = coalition_topic ? kCoalitionWords : kOppositionWords;
      p.description = "Discussion of " + words[rng.below(words.size())] + " and " + words[rng.below(words.size())] +
                      " " + kNeutral[rng.below(kNeutral.size())];
      for (std::size_t m = 0; m < opt.n_members; ++m)
        if (rng.uniform() < 0.25) p.attendees.push_back(member_ids[m]);
      p.attendee_count = static_cast<int>(p.attendees.size());
      p.speaker_name = member_names[rng.below(opt.n_members)];
      b.protocols.push_back(std::move(p));
    }
  }

  // Votes: one roll call per bill.
  const std::array<VoteResult, 3> kResults = {VoteResult::kFor, VoteResult::kAgainst, VoteResult::kAbstain};
  std::vector<std::size_t> plant_candidates;
  for (std::size_t i = 0; i < opt.n_bills; ++i) {
    const int parl = parliament_of(bill_dates[i]);
    for (std::size_t m = 0; m < opt.n_members; ++m) {
      RawVoteRecord v;
      v.country = opt.country;
      char vid[32];
      std::snprintf(vid, sizeof vid, "V%05zu", i + 1);
      v.vote_id = vid;
      v.parliament_number = parl;
      v.session_id = b.bills[i].bill_id;
      v.vote_date = bill_dates[i];
      v.member_id = member_ids[m];
      v.member_name = member_names[m];
      v.party_id = "PTY" + std::to_string(party_of[m] + 1);
      v.party_name = parties[party_of[m]];
      v.member_gender = genders[m];
      v.is_current = parl == parl_b;
      const bool aligned = detail::synthetic_in_coalition(v.party_name, parl) == sponsor_coalition[i];
      const VoteResult line = aligned ? VoteResult::kFor : VoteResult::kAgainst;
      v.vote_result = line;
      if (rng.uniform() < opt.defection_rate) {
        // Defect to one of the two other options.
        std::vector<VoteResult> others;
        for (const auto r : kResults)
          if (r != line) others.push_back(r);
        v.vote_result = others[rng.below(others.size())];
      } else if (opt.plant_from && bill_dates[i] >= *opt.plant_from) {
        plant_candidates.push_back(b.votes.size());
      }
      b.votes.push_back(std::move(v));
    }
  }
  // Planted defections: distinct (bill, member) rows, at most two per bill so
  // party majorities stay intact.
  if (opt.n_planted) {
    Rng prng(derive_seed(opt.seed, "synthetic.planted"));
    prng.shuffle(plant_candidates);
    std::map<std::string, int> per_bill;
    for (const auto idx : plant_candidates) {
      if (out.planted.size() == opt.n_planted) break;
      auto& v = b.votes[idx];
      if (per_bill[v.vote_id] >= 2) continue;
      ++per_bill[v.vote_id];
      v.vote_result = v.vote_result == VoteResult::kFor ? VoteResult::kAgainst : VoteResult::kFor;
      out.planted.push_back(v.row_key());
    }
    std::sort(out.planted.begin(), out.planted.end());
  }
  // Tallies.
  std::map<std::string, std::pair<int, int>> tally;
  for (const auto& v : b.votes) {
    auto& t = tally[v.vote_id];
    t.first += v.vote_result == VoteResult::kFor;
    t.second += v.vote_result == VoteResult::kAgainst;
  }
  for (auto& v : b.votes) {
    v.total_for = tally[v.vote_id].first;
    v.total_against = tally[v.vote_id].second;
  }

  // Config (canonical CSV layout, identity field maps).
  nlohmann::json datasets = nlohmann::json::object();
  for (const auto k : {DatasetKind::kMembers, DatasetKind::kBills, DatasetKind::kVotes, DatasetKind::kProtocols}) {
    nlohmann::json fm = nlohmann::json::object();
    for (const auto& c : canonical_columns(k)) fm[c] = c;
    datasets[std::string(name(k))] = {{"file", std::string(name(k)) + ".csv"}, {"format", "delimited"}, {"field_map", fm}};
  }
  nlohmann::json coalition = nlohmann::json::array();
  for (const int parl : {parl_a, parl_b})
    for (const auto& p : parties)
      coalition.push_back({{"parliament", parl}, {"party", p}, {"in_coalition", detail::synthetic_in_coalition(p, parl)}});
  out.config_json = {
      {"country", opt.country},
      {"year_range", {opt.first_year, opt.last_year}},
      {"parliament_type", "Unicameral"},
      {"datasets", datasets},
      {"vote_tokens", {{"1", 1}, {"2", 2}, {"3", 3}, {"4", 4}, {"5", 5}}},
      {"admissible_vote_results", {"For", "Against", "Abstain"}},
      {"coalition", coalition},
      {"position_ranks",
       {{"prime minister", 5}, {"minister", 4}, {"deputy minister", 3}, {"party leader", 3}, {"committee chair", 2},
        {"member of parliament", 0}}},
      {"rank_max", 5},
      {"bill_link", "session_id"},
      {"embedding", {{"dim", opt.embedding_dim}, {"seed", 7}}},
      {"stopwords", {"the", "and", "bill", "a", "on", "of"}}};
  return out;
}

/// Writes the country as canonical CSV sources plus config.json.
inline void write_synthetic_country(const std::string& dir, const SyntheticParliament& sp) {
  std::filesystem::create_directories(dir);
  write_file((std::filesystem::path(dir) / "members.csv").string(), format_canonical(sp.bundle.members, DatasetKind::kMembers));
  write_file((std::filesystem::path(dir) / "bills.csv").string(), format_canonical(sp.bundle.bills, DatasetKind::kBills));
  write_file((std::filesystem::path(dir) / "votes.csv").string(), format_canonical(sp.bundle.votes, DatasetKind::kVotes));
  write_file((std::filesystem::path(dir) / "protocols.csv").string(), format_canonical(sp.bundle.protocols, DatasetKind::kProtocols));
  write_file((std::filesystem::path(dir) / "config.json").string(), sp.config_json.dump(2) + "\n");
}

}  // namespace vpf
