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

// Small hand-made inputs shared by unit tests and the acceptance runner.

#include <cstdio>
#include <string>
#include <vector>

#include "vpf/vpf.hpp"

namespace fixtures {

/// Numeric matrix with columns f0..f{p-1}, row keys R0001.., one date per row.
inline vpf::FeatureMatrix matrix(const std::vector<std::vector<double>>& rows, const std::vector<int>& y,
                                 std::vector<vpf::Date> dates = {}, std::vector<int> classes = {}) {
  vpf::FeatureMatrix m;
  m.n = rows.size();
  m.p = rows.empty() ? 0 : rows.front().size();
  for (std::size_t j = 0; j < m.p; ++j) m.columns.push_back({"f" + std::to_string(j), vpf::ColumnKind::kNumeric});
  for (std::size_t i = 0; i < m.n; ++i) {
    m.x.insert(m.x.end(), rows[i].begin(), rows[i].end());
    char key[16];
    std::snprintf(key, sizeof key, "R%04zu", i);
    m.row_keys.push_back({key, "M"});
    m.row_dates.push_back(dates.empty() ? vpf::Date::from_days(18000 + static_cast<std::int32_t>(i)) : dates[i]);
  }
  m.y = y;
  if (classes.empty()) {
    classes = y;
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  }
  m.classes = classes;
  return m;
}

/// 400 vote dates shaped like the Israeli data: 240 in 2017, 60 in the first
/// quarter of 2018 and 100 later in 2018. No year boundary lands within 5% of
/// a 75/25 split, and 2018-04-01 leaves exactly 300 rows before it.
inline std::vector<vpf::Date> israel_dates() {
  std::vector<vpf::Date> out;
  const auto spread = [&](vpf::Date from, int span_days, int count) {
    for (int i = 0; i < count; ++i) out.push_back(vpf::Date::from_days(from.days() + i * span_days / count));
  };
  spread(vpf::Date::from_ymd(2017, 1, 1), 365, 240);
  spread(vpf::Date::from_ymd(2018, 1, 1), 90, 60);
  spread(vpf::Date::from_ymd(2018, 4, 1), 270, 100);
  return out;
}

/// Two Gaussian-ish blobs with label noise, for learner smoke checks.
inline vpf::FeatureMatrix noisy_blobs(std::size_t n, std::size_t p, double noise, std::uint64_t seed) {
  vpf::Rng rng(seed);
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = rng.uniform() < 0.5 ? 1 : 2;
    std::vector<double> r(p);
    for (std::size_t j = 0; j < p; ++j) {
      const double centre = j < 2 ? (label == 1 ? -1.0 : 1.0) : 0.0;
      r[j] = centre + (rng.uniform() + rng.uniform() + rng.uniform() - 1.5);
    }
    rows.push_back(r);
    y.push_back(rng.uniform() < noise ? 3 - label : label);
  }
  return matrix(rows, y, {}, {1, 2});
}

}  // namespace fixtures
