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

// Vote-level metrics (confusion, accuracy, F1, one-vs-rest and micro ROC)
// and bill-level aggregation.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "vpf/common.hpp"
#include "vpf/csv.hpp"
#include "vpf/features.hpp"
#include "vpf/schema.hpp"

namespace vpf {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = std::numeric_limits<double>::infinity();
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

/// ROC curve of binary labels against scores, one point per distinct
/// threshold (descending), starting at (0, 0) with threshold +inf. Empty
/// when either class is absent.
inline std::vector<RocPoint> roc_curve(std::span<const std::uint8_t> positive, std::span<const double> score) {
  if (positive.size() != score.size()) throw LengthMismatch("roc labels and scores differ in length");
  std::size_t P = 0;
  for (const auto b : positive) P += b != 0;
  const std::size_t N = positive.size() - P;
  if (P == 0 || N == 0) return {};
  std::vector<std::size_t> order(score.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return score[a] > score[b] || (score[a] == score[b] && a < b);
  });
  std::vector<RocPoint> out = {{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (positive[order[i]] != 0 ? tp : fp) += 1;
    if (i + 1 == order.size() || score[order[i + 1]] != score[order[i]])
      out.push_back({static_cast<double>(fp) / static_cast<double>(N), static_cast<double>(tp) / static_cast<double>(P),
                     score[order[i]]});
  }
  return out;
}

/// Trapezoidal area under a ROC curve.
inline double auc_trapezoid(const std::vector<RocPoint>& pts) {
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    area += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) / 2.0;
  return area;
}

struct EvaluationReport {
  std::vector<int> classes;
  std::vector<std::vector<long long>> confusion;  // [true][predicted]
  std::size_t n_test = 0;
  double accuracy = 0.0;
  double f1_weighted = 0.0;
  double f1_macro = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<long long> support;
  std::vector<std::vector<RocPoint>> per_class_roc;
  std::vector<std::optional<double>> auc_per_class;  // empty when undefined
  std::vector<RocPoint> micro_roc;
  std::optional<double> auc_micro;

  nlohmann::json to_json() const {
    nlohmann::json per_class = nlohmann::json::array();
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const auto vr = vote_result_from_code(classes[c]);
      per_class.push_back({{"class", classes[c]},
                           {"label", vr ? std::string(label(*vr)) : std::to_string(classes[c])},
                           {"support", support[c]},
                           {"precision", precision[c]},
                           {"recall", recall[c]},
                           {"f1", f1[c]},
                           {"auc", auc_per_class[c] ? nlohmann::json(*auc_per_class[c]) : nlohmann::json()}});
    }
    return {{"n_test", n_test},
            {"classes", classes},
            {"confusion", confusion},
            {"accuracy", accuracy},
            {"f1_weighted", f1_weighted},
            {"f1_macro", f1_macro},
            {"auc_micro", auc_micro ? nlohmann::json(*auc_micro) : nlohmann::json()},
            {"per_class", per_class}};
  }
};

/// Metrics for one test set. `proba` is row-major n * |classes|, columns in
/// `classes` order. Per-class F1 is 0 when precision + recall is 0.
inline EvaluationReport compute_metrics(std::span<const int> y_true, std::span<const int> y_pred,
                                        std::span<const double> proba, const std::vector<int>& classes) {
  const std::size_t n = y_true.size();
  const std::size_t k = classes.size();
  if (y_pred.size() != n) throw LengthMismatch("y_true and y_pred differ in length");
  if (proba.size() != n * k) throw LengthMismatch("probability matrix is not n x |classes|");
  if (n == 0) throw EmptyInput("no test rows");
  const auto index_of = [&](int code) {
    const auto it = std::find(classes.begin(), classes.end(), code);
    if (it == classes.end()) throw ContractViolation("label " + std::to_string(code) + " not among the classes");
    return static_cast<std::size_t>(it - classes.begin());
  };

  EvaluationReport r;
  r.classes = classes;
  r.n_test = n;
  r.confusion.assign(k, std::vector<long long>(k, 0));
  std::vector<std::size_t> ti(n);
  for (std::size_t i = 0; i < n; ++i) {
    ti[i] = index_of(y_true[i]);
    ++r.confusion[ti[i]][index_of(y_pred[i])];
  }
  long long diag = 0;
  for (std::size_t c = 0; c < k; ++c) diag += r.confusion[c][c];
  r.accuracy = static_cast<double>(diag) / static_cast<double>(n);

  r.precision.assign(k, 0.0);
  r.recall.assign(k, 0.0);
  r.f1.assign(k, 0.0);
  r.support.assign(k, 0);
  for (std::size_t c = 0; c < k; ++c) {
    long long col = 0, row = 0;
    for (std::size_t o = 0; o < k; ++o) {
      col += r.confusion[o][c];
      row += r.confusion[c][o];
    }
    const double tp = static_cast<double>(r.confusion[c][c]);
    r.support[c] = row;
    r.precision[c] = col ? tp / static_cast<double>(col) : 0.0;
    r.recall[c] = row ? tp / static_cast<double>(row) : 0.0;
    const double s = r.precision[c] + r.recall[c];
    r.f1[c] = s > 0 ? 2.0 * r.precision[c] * r.recall[c] / s : 0.0;
    r.f1_weighted += r.f1[c] * static_cast<double>(row) / static_cast<double>(n);
    r.f1_macro += r.f1[c] / static_cast<double>(k);
  }

  std::vector<std::uint8_t> pos(n);
  std::vector<double> sc(n);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      pos[i] = ti[i] == c;
      sc[i] = proba[i * k + c];
    }
    auto curve = roc_curve(pos, sc);
    r.auc_per_class.push_back(curve.empty() ? std::nullopt : std::optional<double>(auc_trapezoid(curve)));
    r.per_class_roc.push_back(std::move(curve));
  }

  std::vector<std::uint8_t> flat(n * k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) flat[i * k + c] = ti[i] == c;
  r.micro_roc = roc_curve(flat, proba);
  if (!r.micro_roc.empty()) r.auc_micro = auc_trapezoid(r.micro_roc);
  return r;
}

inline std::string class_name(int code) {
  const auto vr = vote_result_from_code(code);
  return vr ? std::string(label(*vr)) : std::to_string(code);
}

/// Plot-ready ROC rows: class,fpr,tpr,threshold (per class, then "micro").
inline std::string draw_roc_points(const EvaluationReport& r) {
  std::string out = "class,fpr,tpr,threshold\n";
  const auto emit = [&](const std::string& cls, const std::vector<RocPoint>& pts) {
    for (const auto& p : pts)
      csv::append_row(out, {cls, format_double(p.fpr), format_double(p.tpr),
                            std::isinf(p.threshold) ? "inf" : format_double(p.threshold)});
  };
  for (std::size_t c = 0; c < r.classes.size(); ++c) emit(class_name(r.classes[c]), r.per_class_roc[c]);
  emit("micro", r.micro_roc);
  return out;
}

// ---------------------------------------------------------------------------
// Bill level
// ---------------------------------------------------------------------------

struct BillRow {
  std::string bill_id;
  std::size_t n_votes = 0;
  std::size_t n_correct = 0;
  bool majority_correct = false;
  bool actual_passed = false;
  bool predicted_passed = false;
};

struct PassReject {
  std::size_t successful_passed = 0;
  std::size_t failed_passed = 0;
  std::size_t successful_rejected = 0;
  std::size_t failed_rejected = 0;

  nlohmann::json to_json() const {
    return {{"successful_passed", successful_passed},
            {"failed_passed", failed_passed},
            {"successful_rejected", successful_rejected},
            {"failed_rejected", failed_rejected}};
  }
};

struct BillReport {
  std::vector<BillRow> rows;
  std::size_t total_bills = 0;
  std::size_t successful_bills = 0;
  double accuracy = 0.0;
  PassReject pass_reject;
  std::size_t unjoined_predictions = 0;

  /// Totals and the pass/reject split derived from `rows`.
  static BillReport from_rows(std::vector<BillRow> rows) {
    BillReport r;
    r.rows = std::move(rows);
    r.total_bills = r.rows.size();
    for (const auto& b : r.rows) {
      r.successful_bills += b.majority_correct;
      auto& pr = r.pass_reject;
      if (b.actual_passed) {
        ++(b.majority_correct ? pr.successful_passed : pr.failed_passed);
      } else {
        ++(b.majority_correct ? pr.successful_rejected : pr.failed_rejected);
      }
    }
    r.accuracy = r.total_bills ? static_cast<double>(r.successful_bills) / static_cast<double>(r.total_bills) : 0.0;
    return r;
  }

  nlohmann::json summary_json() const {
    return {{"total_bills", total_bills},
            {"successful_bills", successful_bills},
            {"accuracy", accuracy},
            {"unjoined_predictions", unjoined_predictions},
            {"pass_reject", pass_reject.to_json()}};
  }
};

/// A strict majority of the bill's votes predicted correctly.
inline bool majority_correct(std::size_t n_correct, std::size_t n_votes) { return 2 * n_correct > n_votes; }

struct VotePrediction {
  RowKey key;
  int predicted = 0;
};

/// Aggregates vote predictions per bill. Predictions that do not join an
/// enriched row with a bill are left out and counted.
inline BillReport bill_level_accuracy(const std::vector<VotePrediction>& predictions,
                                      const std::vector<EnrichedRecord>& records) {
  std::unordered_map<std::string, const EnrichedRecord*> by_key;
  by_key.reserve(records.size());
  for (const auto& r : records) by_key.emplace(r.row_key(), &r);

  struct Acc {
    std::size_t n = 0, correct = 0;
    long long actual_for = 0, actual_against = 0, pred_for = 0, pred_against = 0;
  };
  std::map<std::string, Acc> bills;
  std::size_t unjoined = 0;
  const int kFor = code(VoteResult::kFor), kAgainst = code(VoteResult::kAgainst);
  for (const auto& p : predictions) {
    const auto it = by_key.find(p.key.str());
    if (it == by_key.end() || it->second->bill_id.empty()) {
      ++unjoined;
      continue;
    }
    const int actual = code(it->second->label());
    auto& a = bills[it->second->bill_id];
    ++a.n;
    a.correct += actual == p.predicted;
    a.actual_for += actual == kFor;
    a.actual_against += actual == kAgainst;
    a.pred_for += p.predicted == kFor;
    a.pred_against += p.predicted == kAgainst;
  }
  if (bills.empty()) throw NoJoinableBills("no prediction joins a bill");
  std::vector<BillRow> rows;
  for (const auto& [id, a] : bills)
    rows.push_back({id, a.n, a.correct, majority_correct(a.correct, a.n), a.actual_for > a.actual_against,
                    a.pred_for > a.pred_against});
  auto report = BillReport::from_rows(std::move(rows));
  report.unjoined_predictions = unjoined;
  if (unjoined) log(LogLevel::kWarn, std::to_string(unjoined) + " predictions without a bill left out of bill report");
  return report;
}

inline std::string format_bill_report(const BillReport& r) {
  std::string out = "bill_id,n_votes,n_correct,majority_correct,actual_passed,predicted_passed\n";
  for (const auto& b : r.rows)
    csv::append_row(out, {b.bill_id, std::to_string(b.n_votes), std::to_string(b.n_correct),
                          b.majority_correct ? "true" : "false", b.actual_passed ? "true" : "false",
                          b.predicted_passed ? "true" : "false"});
  return out;
}

/// Index of the best report: highest accuracy, then higher micro AUC, then
/// the earliest.
inline std::size_t best_report_index(const std::vector<const EvaluationReport*>& reports) {
  if (reports.empty()) throw EmptyResults("no evaluation results to choose from");
  const auto auc = [](const EvaluationReport* r) { return r->auc_micro.value_or(-1.0); };
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const auto* a = reports[i];
    const auto* b = reports[best];
    if (a->accuracy > b->accuracy || (a->accuracy == b->accuracy && auc(a) > auc(b))) best = i;
  }
  return best;
}

}  // namespace vpf
