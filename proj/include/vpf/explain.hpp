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

// Model-agnostic Shapley attribution (permutation sampling with background
// rows, plus exact enumeration for small d), beeswarm export, and the
// misprediction / defection report.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "vpf/common.hpp"
#include "vpf/csv.hpp"
#include "vpf/eval.hpp"
#include "vpf/features.hpp"
#include "vpf/models.hpp"

namespace vpf {

/// Scalar model output explained by an attribution (one class probability).
using ValueFunction = std::function<double(std::span<const double>)>;

/// Background rows, row-major.
struct Background {
  std::vector<double> x;
  std::size_t p = 0;
  std::size_t size() const { return p ? x.size() / p : 0; }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * p, p}; }

  static Background from_rows(const std::vector<std::vector<double>>& rows) {
    Background b;
    if (rows.empty()) return b;
    b.p = rows.front().size();
    for (const auto& r : rows) {
      if (r.size() != b.p) throw LengthMismatch("background rows differ in width");
      b.x.insert(b.x.end(), r.begin(), r.end());
    }
    return b;
  }
};

struct Attribution {
  std::string row_key;
  int class_code = 0;
  std::vector<double> phi;
  std::vector<double> std_error;  // per feature; zero for exact attributions
  double base_value = 0.0;
  double prediction = 0.0;
  std::size_t m_samples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double background_mean(const ValueFunction& f, const Background& bg) {
  double s = 0.0;
  for (std::size_t i = 0; i < bg.size(); ++i) s += f(bg.row(i));
  return s / static_cast<double>(bg.size());
}

}  // namespace detail

/// Sampling Shapley values: for each feature j, m draws of (permutation,
/// background row z); the marginal contribution is f(x on pred(j) + j, z
/// elsewhere) - f(x on pred(j), z elsewhere). Reports the sample mean and
/// its standard error. Deterministic given `seed`.
inline Attribution shapley_sampling(const ValueFunction& f, std::span<const double> x, const Background& background,
                                    std::size_t m, std::uint64_t seed) {
  if (background.size() == 0) throw EmptyBackground("background sample is empty");
  if (m < 1) throw InputError("InvalidArgument", "shapley sample count must be >= 1");
  const std::size_t p = x.size();
  if (background.p != p) throw FeatureCountMismatch("background width differs from the explained row");
  Attribution a;
  a.phi.assign(p, 0.0);
  a.std_error.assign(p, 0.0);
  a.m_samples = m;
  a.seed = seed;
  a.base_value = detail::background_mean(f, background);
  a.prediction = f(x);

  Rng rng(seed);
  std::vector<std::size_t> perm(p);
  std::vector<double> b1(p), b2(p);
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      rng.shuffle(perm);
      const auto z = background.row(rng.below(background.size()));
      bool before = true;
      for (const std::size_t q : perm) {
        if (q == j) {
          before = false;
          continue;
        }
        b1[q] = b2[q] = before ? x[q] : z[q];
      }
      b1[j] = x[j];
      b2[j] = z[j];
      const double d = f(b1) - f(b2);
      // Welford update: identical contributions leave the mean exact.
      const double delta = d - mean;
      mean += delta / static_cast<double>(s + 1);
      m2 += delta * (d - mean);
    }
    a.phi[j] = mean;
    a.std_error[j] = m > 1 ? std::sqrt(m2 / static_cast<double>(m - 1) / static_cast<double>(m)) : 0.0;
  }
  return a;
}

inline constexpr std::size_t kMaxExactFeatures = 12;

/// Exact Shapley values by enumerating all 2^d coalitions with
/// v(S) = mean over background z of f(x on S, z elsewhere).
inline Attribution exact_shapley(const ValueFunction& f, std::span<const double> x, const Background& background) {
  const std::size_t d = x.size();
  if (d > kMaxExactFeatures) throw TooManyFeatures(std::to_string(d) + " features exceed the exact limit of 12");
  if (background.size() == 0) throw EmptyBackground("background sample is empty");
  if (background.p != d) throw FeatureCountMismatch("background width differs from the explained row");
  const std::size_t n_sets = std::size_t{1} << d;
  std::vector<double> v(n_sets, 0.0);
  std::vector<double> buf(d);
  for (std::size_t s = 0; s < n_sets; ++s) {
    double acc = 0.0;
    for (std::size_t b = 0; b < background.size(); ++b) {
      const auto z = background.row(b);
      for (std::size_t j = 0; j < d; ++j) buf[j] = (s >> j) & 1 ? x[j] : z[j];
      acc += f(buf);
    }
    v[s] = acc / static_cast<double>(background.size());
  }
  // weight[|S|] = |S|! (d - |S| - 1)! / d!
  std::vector<double> weight(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    double w = 1.0 / static_cast<double>(d);
    // 1 / (d * C(d-1, k))
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(d - 1 - k + i) / static_cast<double>(i);
    weight[k] = w / c;
  }
  Attribution a;
  a.phi.assign(d, 0.0);
  a.std_error.assign(d, 0.0);
  a.base_value = v[0];
  a.prediction = v[n_sets - 1];
  for (std::size_t j = 0; j < d; ++j) {
    const std::size_t bit = std::size_t{1} << j;
    double phi = 0.0;
    for (std::size_t s = 0; s < n_sets; ++s) {
      if (s & bit) continue;
      phi += weight[static_cast<std::size_t>(std::popcount(s))] * (v[s | bit] - v[s]);
    }
    a.phi[j] = phi;
  }
  return a;
}

/// Probability of class index `c` under a trained model.
inline ValueFunction class_probability(const TrainedModel& model, std::size_t c) {
  return [&model, c, buf = std::make_shared<std::vector<double>>(model.k())](std::span<const double> x) {
    predict_proba_row(model, x, *buf);
    return (*buf)[c];
  };
}

/// Background sample of up to `size` training rows, evenly spaced over the
/// canonical (date, row key) order.
inline Background sample_background(const FeatureMatrix& train, std::size_t size) {
  if (train.n == 0) throw EmptyBackground("no training rows for the background sample");
  std::vector<std::size_t> idx(train.n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (train.row_dates[a] != train.row_dates[b]) return train.row_dates[a] < train.row_dates[b];
    return train.row_keys[a] < train.row_keys[b];
  });
  const std::size_t count = std::min(size, train.n);
  Background bg;
  bg.p = train.p;
  for (std::size_t i = 0; i < count; ++i) {
    const auto r = train.row(idx[i * train.n / count]);
    bg.x.insert(bg.x.end(), r.begin(), r.end());
  }
  return bg;
}

// ---------------------------------------------------------------------------
// Beeswarm export
// ---------------------------------------------------------------------------

struct FeatureImportance {
  std::string feature;
  double mean_abs_phi = 0.0;
};

/// Features ranked by mean |phi| (descending; ties by column order).
/// Attributions are summed in row-key order so the ranking does not depend
/// on the order they were produced in.
inline std::vector<FeatureImportance> feature_importance(const std::vector<Attribution>& attributions,
                                                         const std::vector<std::string>& feature_names) {
  if (attributions.empty()) return {};
  std::vector<const Attribution*> sorted;
  for (const auto& a : attributions) sorted.push_back(&a);
  std::sort(sorted.begin(), sorted.end(), [](const Attribution* a, const Attribution* b) {
    return std::tie(a->row_key, a->class_code) < std::tie(b->row_key, b->class_code);
  });
  std::vector<double> total(feature_names.size(), 0.0);
  for (const auto* a : sorted) {
    if (a->phi.size() != feature_names.size()) throw LengthMismatch("attribution width differs from feature names");
    for (std::size_t j = 0; j < total.size(); ++j) total[j] += std::abs(a->phi[j]);
  }
  std::vector<std::size_t> order(total.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return total[a] > total[b]; });
  std::vector<FeatureImportance> out;
  for (const auto j : order)
    out.push_back({feature_names[j], total[j] / static_cast<double>(attributions.size())});
  return out;
}

/// Per-feature min-max scaling over the background; constant features map
/// to 0.5, values outside the background range are clamped.
inline double normalized_value(double v, double lo, double hi) {
  if (!(hi > lo)) return 0.5;
  return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

/// Beeswarm rows: feature,phi,normalized_feature_value,row_key,class.
/// `feature_values[i]` is the explained row of `attributions[i]`.
inline std::string beeswarm_export(const std::vector<Attribution>& attributions,
                                   const std::vector<std::vector<double>>& feature_values,
                                   const std::vector<std::string>& feature_names, const Background& background) {
  if (feature_values.size() != attributions.size()) throw LengthMismatch("one feature row per attribution expected");
  const std::size_t p = feature_names.size();
  std::vector<double> lo(p, std::numeric_limits<double>::infinity()), hi(p, -std::numeric_limits<double>::infinity());
  for (std::size_t b = 0; b < background.size(); ++b)
    for (std::size_t j = 0; j < p; ++j) {
      lo[j] = std::min(lo[j], background.row(b)[j]);
      hi[j] = std::max(hi[j], background.row(b)[j]);
    }
  std::string out = "feature,phi,normalized_feature_value,row_key,class\n";
  for (std::size_t i = 0; i < attributions.size(); ++i) {
    const auto& a = attributions[i];
    for (std::size_t j = 0; j < p; ++j)
      csv::append_row(out, {feature_names[j], format_double(a.phi[j]),
                            format_double(normalized_value(feature_values[i][j], lo[j], hi[j])), a.row_key,
                            class_name(a.class_code)});
  }
  return out;
}

inline std::string format_feature_importance(const std::vector<FeatureImportance>& ranking) {
  std::string out = "rank,feature,mean_abs_phi\n";
  for (std::size_t i = 0; i < ranking.size(); ++i)
    csv::append_row(out, {std::to_string(i + 1), ranking[i].feature, format_double(ranking[i].mean_abs_phi)});
  return out;
}

// ---------------------------------------------------------------------------
// Misprediction report
// ---------------------------------------------------------------------------

struct AnomalyRow {
  std::string vote_id;
  std::string member_id;
  std::string member_name;
  std::string party_name;
  std::string bill_id;
  std::string title;
  int actual = 0;
  int predicted = 0;
  bool is_defection = false;
};

struct AnomalyGroup {
  std::string key;
  std::size_t count = 0;
  std::size_t defections = 0;
};

struct AnomalyReport {
  std::vector<AnomalyRow> rows;
  std::vector<AnomalyGroup> by_party;
  std::vector<AnomalyGroup> by_member;
  std::vector<AnomalyGroup> by_bill;

  std::size_t defections() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.is_defection;
    return n;
  }
};

/// The party's most frequent actual vote on a bill (ties: lower code).
inline std::map<std::pair<std::string, std::string>, int> party_modal_votes(const std::vector<EnrichedRecord>& records) {
  std::map<std::pair<std::string, std::string>, std::map<int, std::size_t>> tally;
  for (const auto& r : records) {
    const std::string bill = r.bill_id.empty() ? r.vote.vote_id : r.bill_id;
    const std::string party = r.vote.party_name.empty() ? r.member_party : r.vote.party_name;
    ++tally[{bill, party}][code(r.label())];
  }
  std::map<std::pair<std::string, std::string>, int> out;
  for (const auto& [key, counts] : tally) {
    int best = 0;
    std::size_t best_n = 0;
    for (const auto& [c, n] : counts)
      if (n > best_n) {
        best = c;
        best_n = n;
      }
    out[key] = best;
  }
  return out;
}

/// Every mispredicted vote, flagged as a defection when the member's actual
/// vote differs from their party's modal actual vote on that bill, plus
/// counts grouped by party, member and bill title (descending count).
inline AnomalyReport false_negative_report(const std::vector<VotePrediction>& predictions,
                                           const std::vector<EnrichedRecord>& records) {
  std::unordered_map<std::string, const EnrichedRecord*> by_key;
  for (const auto& r : records) by_key.emplace(r.row_key(), &r);
  const auto modal = party_modal_votes(records);

  AnomalyReport rep;
  std::map<std::string, AnomalyGroup> party, member, bill;
  for (const auto& p : predictions) {
    const auto it = by_key.find(p.key.str());
    if (it == by_key.end()) continue;
    const EnrichedRecord& r = *it->second;
    const int actual = code(r.label());
    if (actual == p.predicted) continue;
    AnomalyRow row;
    row.vote_id = r.vote.vote_id;
    row.member_id = r.vote.member_id;
    row.member_name = r.vote.member_name;
    row.party_name = r.vote.party_name.empty() ? r.member_party : r.vote.party_name;
    row.bill_id = r.bill_id;
    row.title = r.title;
    row.actual = actual;
    row.predicted = p.predicted;
    const std::string bill_key = r.bill_id.empty() ? r.vote.vote_id : r.bill_id;
    row.is_defection = modal.at({bill_key, row.party_name}) != actual;
    const auto bump = [&](std::map<std::string, AnomalyGroup>& g, const std::string& key) {
      auto& grp = g[key];
      grp.key = key;
      ++grp.count;
      grp.defections += row.is_defection;
    };
    bump(party, row.party_name);
    bump(member, row.member_id + " " + row.member_name);
    bump(bill, row.title.empty() ? bill_key : row.title);
    rep.rows.push_back(std::move(row));
  }
  std::sort(rep.rows.begin(), rep.rows.end(), [](const AnomalyRow& a, const AnomalyRow& b) {
    return std::tie(a.vote_id, a.member_id) < std::tie(b.vote_id, b.member_id);
  });
  const auto ranked = [](const std::map<std::string, AnomalyGroup>& g) {
    std::vector<AnomalyGroup> out;
    for (const auto& [k, v] : g) out.push_back(v);
    std::stable_sort(out.begin(), out.end(), [](const AnomalyGroup& a, const AnomalyGroup& b) { return a.count > b.count; });
    return out;
  };
  rep.by_party = ranked(party);
  rep.by_member = ranked(member);
  rep.by_bill = ranked(bill);
  return rep;
}

inline std::string format_anomalies(const AnomalyReport& rep) {
  std::string out = "vote_id,member_id,member_name,party_name,bill_id,title,actual,predicted,is_defection\n";
  for (const auto& r : rep.rows)
    csv::append_row(out, {r.vote_id, r.member_id, r.member_name, r.party_name, r.bill_id, r.title,
                          class_name(r.actual), class_name(r.predicted), r.is_defection ? "true" : "false"});
  return out;
}

inline nlohmann::json anomaly_groups_json(const AnomalyReport& rep) {
  const auto groups = [](const std::vector<AnomalyGroup>& g) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& x : g) a.push_back({{"key", x.key}, {"count", x.count}, {"defections", x.defections}});
    return a;
  };
  return {{"mispredicted", rep.rows.size()},
          {"defections", rep.defections()},
          {"by_party", groups(rep.by_party)},
          {"by_member", groups(rep.by_member)},
          {"by_bill", groups(rep.by_bill)}};
}

}  // namespace vpf
