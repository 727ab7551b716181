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

// Multi-class learners: decision tree, random forest, gradient-boosted
// trees (softmax), Gaussian naive Bayes. Training canonicalizes row order
// by (date, row key) so fits do not depend on input order.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vpf/common.hpp"
#include "vpf/eval.hpp"
#include "vpf/features.hpp"
#include "vpf/tree.hpp"

namespace vpf {

enum class LearnerKind { kDecisionTree, kRandomForest, kGradientBoostedTrees, kGaussianNaiveBayes };

inline constexpr std::array<LearnerKind, 4> kAllLearners = {
    LearnerKind::kDecisionTree, LearnerKind::kRandomForest, LearnerKind::kGradientBoostedTrees,
    LearnerKind::kGaussianNaiveBayes};

inline std::string_view name(LearnerKind k) {
  switch (k) {
    case LearnerKind::kDecisionTree: return "decision_tree";
    case LearnerKind::kRandomForest: return "random_forest";
    case LearnerKind::kGradientBoostedTrees: return "gradient_boosted_trees";
    case LearnerKind::kGaussianNaiveBayes: return "gaussian_naive_bayes";
  }
  return "?";
}

inline std::optional<LearnerKind> learner_from_name(std::string_view n) {
  for (const auto k : kAllLearners)
    if (name(k) == n) return k;
  return std::nullopt;
}

/// Hyperparameter defaults per learner. Unknown keys are rejected.
inline std::map<std::string, double> default_hyperparameters(LearnerKind k) {
  switch (k) {
    case LearnerKind::kDecisionTree: return {{"max_depth", 0}, {"min_samples_leaf", 1}};
    case LearnerKind::kRandomForest:
      return {{"n_trees", 100}, {"max_depth", 0}, {"min_samples_leaf", 1}, {"max_features", 0}};
    case LearnerKind::kGradientBoostedTrees:
      return {{"max_rounds", 1000}, {"early_stopping_rounds", 30}, {"learning_rate", 0.3},
              {"max_depth", 6},     {"lambda", 1.0},              {"min_child_weight", 1.0},
              {"max_bins", 256},    {"validation_fraction", 0.1}};
    case LearnerKind::kGaussianNaiveBayes: return {{"var_floor", 1e-9}};
  }
  return {};
}

struct LearnerSpec {
  LearnerKind kind = LearnerKind::kDecisionTree;
  std::map<std::string, double> hyperparameters;
  std::uint64_t seed = 0;

  static LearnerSpec make(LearnerKind kind, std::uint64_t seed = 0, const std::map<std::string, double>& overrides = {}) {
    LearnerSpec s{kind, default_hyperparameters(kind), seed};
    for (const auto& [key, v] : overrides) {
      if (!s.hyperparameters.count(key))
        throw InputError("InvalidArgument", "unknown hyperparameter '" + key + "' for " + std::string(name(kind)));
      s.hyperparameters[key] = v;
    }
    return s;
  }

  double hp(const std::string& key) const {
    const auto it = hyperparameters.find(key);
    if (it != hyperparameters.end()) return it->second;
    return default_hyperparameters(kind).at(key);
  }

  friend bool operator==(const LearnerSpec&, const LearnerSpec&) = default;
};

struct TrainedModel {
  LearnerSpec spec;
  std::vector<int> classes;
  std::size_t n_features = 0;
  std::string column_spec_hash;
  std::optional<Date> train_boundary;
  std::optional<int> constant_class;  // index into classes
  // Trees: one per model (decision tree), per member (forest), or
  // round-major k per round (boosting).
  std::vector<Tree> trees;
  int best_round = 0;
  std::vector<double> validation_loss;
  std::vector<double> training_loss;
  // Naive Bayes.
  std::vector<double> log_prior;  // -inf for classes absent from training
  std::vector<double> mean;       // k * p
  std::vector<double> var;        // k * p

  std::size_t k() const { return classes.size(); }
};

namespace detail {

/// Training rows ordered by (date, row key).
inline std::vector<std::size_t> canonical_order(const FeatureMatrix& m) {
  std::vector<std::size_t> idx(m.n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (m.row_dates[a] != m.row_dates[b]) return m.row_dates[a] < m.row_dates[b];
    return m.row_keys[a] < m.row_keys[b];
  });
  return idx;
}

inline std::vector<int> class_indices(const FeatureMatrix& m, const std::vector<int>& classes) {
  std::vector<int> out(m.n);
  for (std::size_t i = 0; i < m.n; ++i) {
    const auto it = std::find(classes.begin(), classes.end(), m.y[i]);
    if (it == classes.end()) throw ContractViolation("label " + std::to_string(m.y[i]) + " not among the classes");
    out[i] = static_cast<int>(it - classes.begin());
  }
  return out;
}

inline void softmax(std::span<double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (const double x : v) mx = std::max(mx, x);
  double s = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    s += x;
  }
  for (double& x : v) x /= s;
}

inline double mlogloss(std::span<const double> margins, std::span<const int> y, std::size_t k) {
  std::vector<double> p(k);
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    std::copy_n(margins.begin() + static_cast<std::ptrdiff_t>(i * k), k, p.begin());
    softmax(p);
    loss -= std::log(std::max(p[static_cast<std::size_t>(y[i])], 1e-15));
  }
  return y.empty() ? 0.0 : loss / static_cast<double>(y.size());
}

inline std::size_t size_hp(const LearnerSpec& s, const std::string& key) {
  const double v = s.hp(key);
  if (!(v >= 0) || v != std::floor(v)) throw InputError("InvalidArgument", key + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

inline void train_boosting(TrainedModel& model, const FeatureMatrix& m, const std::vector<int>& y) {
  const auto& spec = model.spec;
  const std::size_t k = model.k();
  const std::size_t p = m.p;
  const std::size_t n_val = static_cast<std::size_t>(std::floor(spec.hp("validation_fraction") * static_cast<double>(m.n)));
  const std::size_t n_fit = m.n - n_val;
  if (n_fit == 0) throw EmptyTrainingSet("validation slice leaves no rows to fit");
  const std::size_t max_rounds = size_hp(spec, "max_rounds");
  const std::size_t patience = size_hp(spec, "early_stopping_rounds");
  HistTreeOptions opt;
  opt.max_depth = size_hp(spec, "max_depth");
  opt.lambda = spec.hp("lambda");
  opt.min_child_weight = spec.hp("min_child_weight");
  opt.learning_rate = spec.hp("learning_rate");

  const std::span<const double> xfit(m.x.data(), n_fit * p);
  const auto mapper = BinMapper::fit(xfit, n_fit, p, std::max<std::size_t>(2, std::min<std::size_t>(256, size_hp(spec, "max_bins"))));
  const auto bins = mapper.transform(xfit, n_fit, p);
  std::vector<std::size_t> rows(n_fit);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const std::span<const int> yfit(y.data(), n_fit);
  const std::span<const int> yval(y.data() + n_fit, n_val);

  std::vector<double> margin(n_fit * k, 0.0), vmargin(n_val * k, 0.0);
  std::vector<double> g(n_fit), h(n_fit), prob(n_fit * k);
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  for (std::size_t round = 1; round <= max_rounds; ++round) {
    for (std::size_t i = 0; i < n_fit; ++i) {
      std::span<double> pr(prob.data() + i * k, k);
      std::copy_n(margin.begin() + static_cast<std::ptrdiff_t>(i * k), k, pr.begin());
      softmax(pr);
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < n_fit; ++i) {
        const double pc = prob[i * k + c];
        g[i] = pc - (static_cast<std::size_t>(yfit[i]) == c ? 1.0 : 0.0);
        h[i] = std::max(2.0 * pc * (1.0 - pc), 1e-16);
      }
      model.trees.push_back(fit_hist_tree(bins, p, mapper, rows, g, h, opt));
    }
    const std::span<const Tree> round_trees(model.trees.data() + (round - 1) * k, k);
    for (std::size_t i = 0; i < n_fit; ++i)
      for (std::size_t c = 0; c < k; ++c) margin[i * k + c] += round_trees[c].leaf(m.row(i))[0];
    for (std::size_t i = 0; i < n_val; ++i)
      for (std::size_t c = 0; c < k; ++c) vmargin[i * k + c] += round_trees[c].leaf(m.row(n_fit + i))[0];
    model.training_loss.push_back(mlogloss(margin, yfit, k));
    if (n_val == 0) {
      best = round;
      continue;
    }
    const double vl = mlogloss(vmargin, yval, k);
    model.validation_loss.push_back(vl);
    if (vl < best_loss) {
      best_loss = vl;
      best = round;
    } else if (round - best >= patience) {
      break;
    }
  }
  model.best_round = static_cast<int>(best);
  model.trees.resize(best * k);
}

inline void train_naive_bayes(TrainedModel& model, const FeatureMatrix& m, const std::vector<int>& y) {
  const std::size_t k = model.k(), p = m.p;
  const double floor = model.spec.hp("var_floor");
  std::vector<double> count(k, 0.0);
  model.mean.assign(k * p, 0.0);
  model.var.assign(k * p, 0.0);
  for (std::size_t i = 0; i < m.n; ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    count[c] += 1.0;
    for (std::size_t f = 0; f < p; ++f) model.mean[c * p + f] += m.at(i, f);
  }
  for (std::size_t c = 0; c < k; ++c)
    if (count[c] > 0)
      for (std::size_t f = 0; f < p; ++f) model.mean[c * p + f] /= count[c];
  for (std::size_t i = 0; i < m.n; ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    for (std::size_t f = 0; f < p; ++f) {
      const double d = m.at(i, f) - model.mean[c * p + f];
      model.var[c * p + f] += d * d;
    }
  }
  model.log_prior.assign(k, -std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t f = 0; f < p; ++f)
      model.var[c * p + f] = std::max(count[c] > 0 ? model.var[c * p + f] / count[c] : 0.0, floor);
    if (count[c] > 0) model.log_prior[c] = std::log(count[c] / static_cast<double>(m.n));
  }
}

}  // namespace detail

/// Fits a learner. Row order of `train_set` does not matter.
inline TrainedModel train(const LearnerSpec& spec, const FeatureMatrix& train_set) {
  if (train_set.n == 0) throw EmptyTrainingSet("training matrix has no rows");
  TrainedModel model;
  model.spec = spec;
  for (const auto& [key, v] : spec.hyperparameters)
    if (!default_hyperparameters(spec.kind).count(key))
      throw InputError("InvalidArgument", "unknown hyperparameter '" + key + "'");
  model.classes = train_set.classes;
  if (model.classes.empty()) {
    model.classes = train_set.y;
    std::sort(model.classes.begin(), model.classes.end());
    model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
  }
  model.n_features = train_set.p;
  model.column_spec_hash = column_spec_hash(train_set);

  const FeatureMatrix m = train_set.subset(detail::canonical_order(train_set));
  const auto y = detail::class_indices(m, model.classes);
  const int k = static_cast<int>(model.k());

  std::vector<int> present(y.begin(), y.end());
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  if (present.size() == 1) {
    model.constant_class = present.front();
    return model;
  }

  switch (spec.kind) {
    case LearnerKind::kDecisionTree: {
      CartOptions opt;
      opt.max_depth = detail::size_hp(spec, "max_depth");
      opt.min_samples_leaf = spec.hp("min_samples_leaf");
      opt.seed = spec.seed;
      const std::vector<double> w(m.n, 1.0);
      model.trees.push_back(fit_cart(m.x, m.p, y, w, k, opt));
      break;
    }
    case LearnerKind::kRandomForest: {
      const std::size_t n_trees = detail::size_hp(spec, "n_trees");
      if (n_trees == 0) throw InputError("InvalidArgument", "n_trees must be >= 1");
      CartOptions opt;
      opt.max_depth = detail::size_hp(spec, "max_depth");
      opt.min_samples_leaf = spec.hp("min_samples_leaf");
      opt.max_features = detail::size_hp(spec, "max_features");
      if (opt.max_features == 0)
        opt.max_features = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(m.p)))));
      std::vector<std::string> keys(m.n);
      for (std::size_t i = 0; i < m.n; ++i) keys[i] = m.row_keys[i].str();
      std::vector<double> w(m.n);
      for (std::size_t t = 0; t < n_trees; ++t) {
        // Bootstrap weights keyed by row identity, not position.
        const std::uint64_t tree_seed = splitmix64(spec.seed ^ splitmix64(t + 1));
        for (std::size_t i = 0; i < m.n; ++i) {
          const std::uint64_t hsh = splitmix64(fnv1a64(keys[i], tree_seed));
          w[i] = poisson1(static_cast<double>(hsh >> 11) * 0x1.0p-53);
        }
        opt.seed = splitmix64(tree_seed ^ 0xf00dULL);
        model.trees.push_back(fit_cart(m.x, m.p, y, w, k, opt));
      }
      break;
    }
    case LearnerKind::kGradientBoostedTrees: detail::train_boosting(model, m, y); break;
    case LearnerKind::kGaussianNaiveBayes: detail::train_naive_bayes(model, m, y); break;
  }
  return model;
}

/// Class probabilities for one row, in `model.classes` order.
inline void predict_proba_row(const TrainedModel& model, std::span<const double> x, std::span<double> out) {
  const std::size_t k = model.k();
  if (x.size() != model.n_features)
    throw FeatureCountMismatch("row has " + std::to_string(x.size()) + " features, model expects " +
                               std::to_string(model.n_features));
  std::fill(out.begin(), out.end(), 0.0);
  if (model.constant_class) {
    out[static_cast<std::size_t>(*model.constant_class)] = 1.0;
    return;
  }
  switch (model.spec.kind) {
    case LearnerKind::kDecisionTree:
    case LearnerKind::kRandomForest: {
      for (const auto& t : model.trees) {
        const auto leaf = t.leaf(x);
        for (std::size_t c = 0; c < k; ++c) out[c] += leaf[c];
      }
      double s = 0.0;
      for (const double v : out) s += v;
      for (double& v : out) v /= s;
      break;
    }
    case LearnerKind::kGradientBoostedTrees: {
      for (std::size_t t = 0; t < model.trees.size(); ++t) out[t % k] += model.trees[t].leaf(x)[0];
      detail::softmax(out);
      break;
    }
    case LearnerKind::kGaussianNaiveBayes: {
      const std::size_t p = model.n_features;
      constexpr double kLog2Pi = 1.8378770664093453;
      for (std::size_t c = 0; c < k; ++c) {
        if (std::isinf(model.log_prior[c])) {
          out[c] = -std::numeric_limits<double>::infinity();
          continue;
        }
        double ll = model.log_prior[c];
        for (std::size_t f = 0; f < p; ++f) {
          const double v = model.var[c * p + f];
          const double d = x[f] - model.mean[c * p + f];
          ll -= 0.5 * (kLog2Pi + std::log(v) + d * d / v);
        }
        out[c] = ll;
      }
      detail::softmax(out);
      break;
    }
  }
}

/// n * k row-major probabilities.
inline std::vector<double> predict_proba(const TrainedModel& model, const FeatureMatrix& x) {
  if (x.p != model.n_features)
    throw FeatureCountMismatch("matrix has " + std::to_string(x.p) + " features, model expects " +
                               std::to_string(model.n_features));
  if (!model.column_spec_hash.empty() && column_spec_hash(x) != model.column_spec_hash)
    throw ContractViolation("column_spec hash mismatch: model " + model.column_spec_hash + ", matrix " +
                            column_spec_hash(x));
  const std::size_t k = model.k();
  std::vector<double> out(x.n * k);
  for (std::size_t i = 0; i < x.n; ++i) predict_proba_row(model, x.row(i), {out.data() + i * k, k});
  return out;
}

/// Argmax per row; ties go to the lower class code.
inline std::vector<int> argmax_labels(std::span<const double> proba, const std::vector<int>& classes) {
  const std::size_t k = classes.size();
  std::vector<int> out(proba.size() / k);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c) {
      const double a = proba[i * k + c], b = proba[i * k + best];
      if (a > b || (a == b && classes[c] < classes[best])) best = c;
    }
    out[i] = classes[best];
  }
  return out;
}

inline std::vector<int> predict(const TrainedModel& model, const FeatureMatrix& x) {
  return argmax_labels(predict_proba(model, x), model.classes);
}

/// Highest test accuracy; ties by higher micro AUC, then declaration order.
inline LearnerSpec select_best(const std::vector<std::pair<LearnerSpec, EvaluationReport>>& results) {
  std::vector<const EvaluationReport*> reports;
  for (const auto& r : results) reports.push_back(&r.second);
  return results[best_report_index(reports)].first;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json model_to_json(const TrainedModel& m) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : m.trees) trees.push_back(t.to_json());
  nlohmann::json j = {{"format", "vpf-model"},
                      {"version", 1},
                      {"kind", std::string(name(m.spec.kind))},
                      {"hyperparameters", m.spec.hyperparameters},
                      {"seed", m.spec.seed},
                      {"classes", m.classes},
                      {"n_features", m.n_features},
                      {"column_spec_hash", m.column_spec_hash},
                      {"train_boundary", m.train_boundary ? nlohmann::json(m.train_boundary->iso()) : nlohmann::json()},
                      {"constant_class", m.constant_class ? nlohmann::json(*m.constant_class) : nlohmann::json()},
                      {"best_round", m.best_round},
                      {"validation_loss", m.validation_loss},
                      {"training_loss", m.training_loss},
                      {"trees", trees}};
  if (m.spec.kind == LearnerKind::kGaussianNaiveBayes) {
    // -inf is not representable in JSON; absent classes are null.
    nlohmann::json lp = nlohmann::json::array();
    for (const double v : m.log_prior) lp.push_back(std::isinf(v) ? nlohmann::json() : nlohmann::json(v));
    j["log_prior"] = lp;
    j["mean"] = m.mean;
    j["var"] = m.var;
  }
  return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  TrainedModel m;
  try {
    if (j.at("format") != "vpf-model" || j.at("version") != 1) throw ParseError("not a version 1 vpf model");
    const auto kind = learner_from_name(j.at("kind").get<std::string>());
    if (!kind) throw ParseError("unknown model kind");
    m.spec.kind = *kind;
    m.spec.hyperparameters = j.at("hyperparameters").get<std::map<std::string, double>>();
    m.spec.seed = j.at("seed").get<std::uint64_t>();
    m.classes = j.at("classes").get<std::vector<int>>();
    m.n_features = j.at("n_features").get<std::size_t>();
    m.column_spec_hash = j.at("column_spec_hash").get<std::string>();
    if (!j.at("train_boundary").is_null()) m.train_boundary = parse_iso_date(j.at("train_boundary").get<std::string>());
    if (!j.at("constant_class").is_null()) m.constant_class = j.at("constant_class").get<int>();
    m.best_round = j.at("best_round").get<int>();
    m.validation_loss = j.at("validation_loss").get<std::vector<double>>();
    m.training_loss = j.at("training_loss").get<std::vector<double>>();
    for (const auto& t : j.at("trees")) m.trees.push_back(Tree::from_json(t));
    if (j.contains("log_prior")) {
      for (const auto& v : j.at("log_prior"))
        m.log_prior.push_back(v.is_null() ? -std::numeric_limits<double>::infinity() : v.get<double>());
      m.mean = j.at("mean").get<std::vector<double>>();
      m.var = j.at("var").get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  const std::size_t k = m.classes.size();
  if (k == 0) throw ParseError("model has no classes");
  if (!m.constant_class) {
    if (m.spec.kind == LearnerKind::kGaussianNaiveBayes) {
      if (m.log_prior.size() != k || m.mean.size() != k * m.n_features || m.var.size() != k * m.n_features)
        throw ParseError("naive Bayes parameters have the wrong shape");
    } else if (m.trees.empty()) {
      throw ParseError("model has no trees");
    }
  }
  for (const auto& t : m.trees) {
    for (const int f : t.feature)
      if (f >= static_cast<int>(m.n_features)) throw ParseError("tree feature index out of range");
    const int want = m.spec.kind == LearnerKind::kGradientBoostedTrees ? 1 : static_cast<int>(k);
    if (t.width != want) throw ParseError("tree leaf width does not match the model");
  }
  return m;
}

inline std::string model_file_name(LearnerKind k) { return "model." + std::string(name(k)) + ".vpf"; }

}  // namespace vpf
