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

#pragma once

// Reference implementations used only by tests. Each one computes its value
// from the definition, by brute force, and shares no code with the library
// routine it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "vpf/vpf.hpp"

namespace oracle {

/// P(score of a random positive > score of a random negative), ties count ½.
inline double rank_auc(const std::vector<int>& positive, const std::vector<double>& score) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < score.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t j = 0; j < score.size(); ++j) {
      if (positive[j]) continue;
      pairs += 1.0;
      if (score[i] > score[j]) {
        wins += 1.0;
      } else if (score[i] == score[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / pairs;
}

/// Shapley values as the mean marginal contribution over all d! orderings,
/// with v(S) = mean over background rows of f(x on S, background elsewhere).
inline std::vector<double> permutation_shapley(const std::function<double(const std::vector<double>&)>& f,
                                               const std::vector<double>& x,
                                               const std::vector<std::vector<double>>& background) {
  const std::size_t d = x.size();
  std::vector<double> v(std::size_t{1} << d, 0.0);
  for (std::size_t mask = 0; mask < v.size(); ++mask) {
    double total = 0.0;
    for (const auto& b : background) {
      std::vector<double> z = b;
      for (std::size_t j = 0; j < d; ++j)
        if (mask >> j & 1U) z[j] = x[j];
      total += f(z);
    }
    v[mask] = total / static_cast<double>(background.size());
  }
  std::vector<std::size_t> perm(d);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<double> phi(d, 0.0);
  double count = 0.0;
  do {
    std::size_t mask = 0;
    for (const auto j : perm) {
      phi[j] += v[mask | (std::size_t{1} << j)] - v[mask];
      mask |= std::size_t{1} << j;
    }
    count += 1.0;
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (auto& p : phi) p /= count;
  return phi;
}

struct BruteSplit {
  vpf::Date boundary;
  std::size_t train_rows = 0;
};

inline vpf::Date period_floor(vpf::Date d, vpf::Resolution r) {
  const auto ymd = d.ymd();
  switch (r) {
    case vpf::Resolution::kYear: return vpf::Date::from_ymd(ymd.year, 1, 1);
    case vpf::Resolution::kMonth: return vpf::Date::from_ymd(ymd.year, ymd.month, 1);
    case vpf::Resolution::kDay: return d;
  }
  return d;
}

/// Every candidate boundary at one resolution, counted by a linear scan.
inline std::vector<BruteSplit> brute_candidates(const std::vector<vpf::Date>& dates, vpf::Resolution r) {
  std::vector<vpf::Date> starts;
  for (const auto d : dates) starts.push_back(period_floor(d, r));
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
  std::vector<BruteSplit> out;
  for (std::size_t i = 1; i < starts.size(); ++i) {
    std::size_t before = 0;
    for (const auto d : dates) before += d < starts[i];
    out.push_back({starts[i], before});
  }
  return out;
}

/// Best candidate at one resolution: minimal |train/n − target|, earliest on ties.
inline std::optional<BruteSplit> brute_best(const std::vector<vpf::Date>& dates, vpf::Resolution r, double target) {
  std::optional<BruteSplit> best;
  double best_dev = 0.0;
  const double n = static_cast<double>(dates.size());
  for (const auto& c : brute_candidates(dates, r)) {
    const double dev = std::abs(static_cast<double>(c.train_rows) / n - target);
    if (!best || dev < best_dev - 1e-12) {
      best = c;
      best_dev = dev;
    }
  }
  return best;
}

/// Value a repair_log entry should carry, recomputed from its method and the
/// bundle as it was before repair. Empty optional when the method is unknown.
inline std::optional<std::string> rederive(const vpf::RepairLogEntry& e, const vpf::RawBundle& pre,
                                           const std::vector<vpf::OverrideEntry>& overrides) {
  if (e.method == "manual") {
    std::optional<std::string> v;
    for (const auto& o : overrides)
      if (o.dataset == e.dataset && o.row_key == e.row_key && o.field == e.field) v = o.value;
    return v;
  }
  if (e.method == "derived" && e.dataset == "protocols") {
    for (const auto& p : pre.protocols)
      if (p.meeting_id == e.row_key) return std::to_string(p.attendees.size());
    return std::nullopt;
  }
  if (e.method == "cross_join" && e.dataset == "votes") {
    const vpf::RawVoteRecord* vote = nullptr;
    for (const auto& v : pre.votes)
      if (v.vote_id + "|" + v.member_id == e.row_key) vote = &v;
    if (!vote) return std::nullopt;
    // Nearest parliament number, lower one on ties.
    const vpf::MemberProfile* best = nullptr;
    for (const auto& m : pre.members) {
      if (m.person_id != vote->member_id) continue;
      const auto dist = [&](const vpf::MemberProfile* p) { return std::abs(p->parliament_number - vote->parliament_number); };
      if (!best || dist(&m) < dist(best) || (dist(&m) == dist(best) && m.parliament_number < best->parliament_number))
        best = &m;
    }
    if (!best) return std::nullopt;
    if (e.field == "member_name") return best->first_name + " " + best->last_name;
    if (e.field == "party_name") return best->party;
    if (e.field == "member_gender") return std::string(vpf::label(best->gender));
    return std::nullopt;
  }
  if (e.method == "neighbor" && e.dataset == "votes") {
    // Rows ordered by (vote_id, member_id); nearest dated row on each side.
    std::vector<const vpf::RawVoteRecord*> rows;
    for (const auto& v : pre.votes) rows.push_back(&v);
    std::stable_sort(rows.begin(), rows.end(), [](auto* a, auto* b) {
      if (a->vote_id != b->vote_id) return vpf::natural_less(a->vote_id, b->vote_id);
      return vpf::natural_less(a->member_id, b->member_id);
    });
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i]->vote_id + "|" + rows[i]->member_id != e.row_key) continue;
      std::optional<vpf::Date> lo, hi;
      for (std::size_t j = i; j-- > 0;)
        if (rows[j]->vote_date) {
          lo = rows[j]->vote_date;
          break;
        }
      for (std::size_t j = i + 1; j < rows.size(); ++j)
        if (rows[j]->vote_date) {
          hi = rows[j]->vote_date;
          break;
        }
      if (lo && hi && *lo == *hi) return lo->iso();
      return std::nullopt;
    }
  }
  if (e.method == "neighbor" && (e.dataset == "bills" || e.dataset == "protocols")) {
    std::vector<std::pair<std::string, std::optional<vpf::Date>>> rows;
    if (e.dataset == "bills") {
      for (const auto& b : pre.bills) rows.emplace_back(b.bill_id, b.date);
    } else {
      for (const auto& p : pre.protocols) rows.emplace_back(p.meeting_id, p.date);
    }
    std::stable_sort(rows.begin(), rows.end(), [](auto& a, auto& b) { return vpf::natural_less(a.first, b.first); });
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].first != e.row_key) continue;
      std::optional<vpf::Date> lo, hi;
      for (std::size_t j = i; j-- > 0;)
        if (rows[j].second) {
          lo = rows[j].second;
          break;
        }
      for (std::size_t j = i + 1; j < rows.size(); ++j)
        if (rows[j].second) {
          hi = rows[j].second;
          break;
        }
      if (lo && hi && *lo == *hi) return lo->iso();
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace oracle
