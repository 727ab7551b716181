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

// Chronological train/test split at a calendar boundary.

#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "vpf/common.hpp"
#include "vpf/features.hpp"

namespace vpf {

enum class Resolution { kYear, kMonth, kDay };

inline std::string_view name(Resolution r) {
  switch (r) {
    case Resolution::kYear: return "year";
    case Resolution::kMonth: return "month";
    case Resolution::kDay: return "day";
  }
  return "?";
}

inline std::optional<Resolution> resolution_from_name(std::string_view n) {
  if (n == "year") return Resolution::kYear;
  if (n == "month") return Resolution::kMonth;
  if (n == "day") return Resolution::kDay;
  return std::nullopt;
}

/// First day of the period containing `d`.
inline Date period_start(Date d, Resolution r) {
  const auto [y, m, day] = d.ymd();
  switch (r) {
    case Resolution::kYear: return Date::from_ymd(y, 1, 1);
    case Resolution::kMonth: return Date::from_ymd(y, m, 1);
    case Resolution::kDay: return d;
  }
  return d;
}

struct SplitPlan {
  Date boundary_date;
  Resolution resolution = Resolution::kYear;
  double train_fraction = 0.0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  double target = 0.75;

  nlohmann::json to_json() const {
    return {{"boundary_date", boundary_date.iso()}, {"resolution", std::string(name(resolution))},
            {"train_fraction", train_fraction},     {"test_fraction", train_rows + test_rows ? static_cast<double>(test_rows) / static_cast<double>(train_rows + test_rows) : 0.0},
            {"train_rows", train_rows},             {"test_rows", test_rows},
            {"target", target}};
  }

  static SplitPlan from_json(const nlohmann::json& j) {
    SplitPlan p;
    try {
      const auto d = parse_iso_date(j.at("boundary_date").get<std::string>());
      const auto r = resolution_from_name(j.at("resolution").get<std::string>());
      if (!d || !r) throw ParseError("split_plan.json: bad boundary or resolution");
      p.boundary_date = *d;
      p.resolution = *r;
      p.train_fraction = j.at("train_fraction").get<double>();
      p.train_rows = j.at("train_rows").get<std::size_t>();
      p.test_rows = j.at("test_rows").get<std::size_t>();
      p.target = j.value("target", 0.75);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("split_plan.json: ") + e.what());
    }
    return p;
  }
};

struct SplitCandidate {
  Date boundary;
  std::size_t train_rows = 0;
};

/// Candidate boundaries at one resolution: every distinct period start except
/// the earliest, with the number of rows strictly before it.
inline std::vector<SplitCandidate> split_candidates(const std::vector<Date>& dates, Resolution r) {
  std::vector<Date> sorted = dates;
  std::sort(sorted.begin(), sorted.end());
  std::set<Date> starts;
  for (const Date d : sorted) starts.insert(period_start(d, r));
  std::vector<SplitCandidate> out;
  bool first = true;
  for (const Date s : starts) {
    if (first) {
      first = false;
      continue;
    }
    const auto pos = std::lower_bound(sorted.begin(), sorted.end(), s);
    out.push_back({s, static_cast<std::size_t>(pos - sorted.begin())});
  }
  return out;
}

/// Boundary chosen for a date multiset. Deviation is compared in row units so
/// exact ties (e.g. 70 vs 80 of 100 around 75) are detected exactly and go to
/// the earlier boundary.
inline SplitPlan plan_split(const std::vector<Date>& dates, double target = 0.75,
                            const std::vector<Resolution>& resolutions = {Resolution::kYear, Resolution::kMonth,
                                                                          Resolution::kDay},
                            double tolerance = 0.05) {
  if (dates.empty()) throw EmptyInput("no rows to split");
  if (!(target > 0.0 && target < 1.0)) throw InputError("InvalidArgument", "split target must be in (0, 1)");
  if (resolutions.empty()) throw InputError("InvalidArgument", "no split resolutions given");
  const auto [lo, hi] = std::minmax_element(dates.begin(), dates.end());
  if (*lo == *hi) throw DegenerateDates("all rows share the date " + lo->iso());

  const double n = static_cast<double>(dates.size());
  const double goal = target * n;
  std::optional<SplitPlan> best_overall;
  for (const Resolution r : resolutions) {
    const auto candidates = split_candidates(dates, r);
    if (candidates.empty()) continue;
    const SplitCandidate* best = nullptr;
    double best_dev = 0.0;
    for (const auto& c : candidates) {
      const double dev = std::abs(static_cast<double>(c.train_rows) - goal);
      if (!best || dev < best_dev) {
        best = &c;
        best_dev = dev;
      }
    }
    SplitPlan plan;
    plan.boundary_date = best->boundary;
    plan.resolution = r;
    plan.train_rows = best->train_rows;
    plan.test_rows = dates.size() - best->train_rows;
    plan.train_fraction = static_cast<double>(plan.train_rows) / n;
    plan.target = target;
    best_overall = plan;
    if (best_dev / n <= tolerance + 1e-12) break;
  }
  if (!best_overall) throw DegenerateDates("no split boundary available");
  return *best_overall;
}

struct SplitResult {
  FeatureMatrix train;
  FeatureMatrix test;
  SplitPlan plan;
  std::vector<std::size_t> train_index;
  std::vector<std::size_t> test_index;
};

/// Partitions rows by `plan.boundary_date`; row order within each side is
/// the matrix order.
inline SplitResult apply_split(const FeatureMatrix& m, const SplitPlan& plan) {
  SplitResult out;
  out.plan = plan;
  for (std::size_t i = 0; i < m.n; ++i)
    (m.row_dates[i] < plan.boundary_date ? out.train_index : out.test_index).push_back(i);
  out.train = m.subset(out.train_index);
  out.test = m.subset(out.test_index);
  return out;
}

inline SplitResult time_series_split(const FeatureMatrix& m, double target = 0.75,
                                     const std::vector<Resolution>& resolutions = {
                                         Resolution::kYear, Resolution::kMonth, Resolution::kDay}) {
  return apply_split(m, plan_split(m.row_dates, target, resolutions));
}

/// Row-key list CSV (vote_id,member_id).
inline std::string format_row_keys(const FeatureMatrix& m, const std::vector<std::size_t>& idx) {
  std::string out = "vote_id,member_id\n";
  for (const auto i : idx) csv::append_row(out, {m.row_keys[i].vote_id, m.row_keys[i].member_id});
  return out;
}

}  // namespace vpf
