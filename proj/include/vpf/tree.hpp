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

// Tree building blocks: a flat binary tree, exact Gini CART for
// classification, and a histogram regression tree for boosting.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "json.hpp"
#include "vpf/common.hpp"

namespace vpf {

/// Flat binary tree. Internal node i sends x to left[i] when
/// x[feature[i]] < threshold[i]. Leaves have feature -1 and own `width`
/// values starting at value_offset[i].
struct Tree {
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<std::size_t> value_offset;
  std::vector<double> values;
  int width = 1;

  std::size_t size() const { return feature.size(); }

  int add_node() {
    feature.push_back(-1);
    threshold.push_back(0.0);
    left.push_back(-1);
    right.push_back(-1);
    value_offset.push_back(0);
    return static_cast<int>(feature.size() - 1);
  }

  void make_leaf(int node, std::span<const double> v) {
    feature[node] = -1;
    value_offset[node] = values.size();
    values.insert(values.end(), v.begin(), v.end());
  }

  std::span<const double> leaf(std::span<const double> x) const {
    std::size_t i = 0;
    while (feature[i] >= 0) i = static_cast<std::size_t>(x[feature[i]] < threshold[i] ? left[i] : right[i]);
    return {values.data() + value_offset[i], static_cast<std::size_t>(width)};
  }

  std::size_t depth() const {
    std::size_t best = 0;
    std::vector<std::pair<int, std::size_t>> stack = {{0, 0}};
    while (!stack.empty()) {
      const auto [n, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      if (feature[n] >= 0) {
        stack.push_back({left[n], d + 1});
        stack.push_back({right[n], d + 1});
      }
    }
    return best;
  }

  nlohmann::json to_json() const {
    return {{"width", width}, {"feature", feature}, {"threshold", threshold}, {"left", left},
            {"right", right}, {"value_offset", value_offset}, {"values", values}};
  }

  static Tree from_json(const nlohmann::json& j) {
    Tree t;
    t.width = j.at("width").get<int>();
    t.feature = j.at("feature").get<std::vector<int>>();
    t.threshold = j.at("threshold").get<std::vector<double>>();
    t.left = j.at("left").get<std::vector<int>>();
    t.right = j.at("right").get<std::vector<int>>();
    t.value_offset = j.at("value_offset").get<std::vector<std::size_t>>();
    t.values = j.at("values").get<std::vector<double>>();
    const std::size_t n = t.feature.size();
    if (n == 0 || t.threshold.size() != n || t.left.size() != n || t.right.size() != n || t.value_offset.size() != n)
      throw ParseError("malformed tree");
    for (std::size_t i = 0; i < n; ++i) {
      if (t.feature[i] >= 0) {
        if (t.left[i] <= static_cast<int>(i) || t.right[i] <= static_cast<int>(i) || t.left[i] >= static_cast<int>(n) ||
            t.right[i] >= static_cast<int>(n))
          throw ParseError("malformed tree links");
      } else if (t.value_offset[i] + static_cast<std::size_t>(t.width) > t.values.size()) {
        throw ParseError("malformed tree leaf");
      }
    }
    return t;
  }
};

/// Threshold strictly above `a` and at most `b` (a < b), near the midpoint.
inline double midpoint_threshold(double a, double b) {
  const double t = a + (b - a) / 2.0;
  return t > a ? t : b;
}

/// Poisson(1) draw by inversion from a uniform in [0, 1).
inline int poisson1(double u) {
  double p = 0.36787944117144233;
  double cdf = p;
  int k = 0;
  while (u >= cdf && k < 64) {
    ++k;
    p /= k;
    cdf += p;
  }
  return k;
}

// ---------------------------------------------------------------------------
// CART (Gini)
// ---------------------------------------------------------------------------

struct CartOptions {
  std::size_t max_depth = 0;         // 0: unlimited
  double min_samples_leaf = 1.0;     // weight units
  std::size_t max_features = 0;      // 0: all features at every split
  std::uint64_t seed = 0;            // feature subsampling
};

/// Fits a classification tree. `x` is row-major n*p, `y` class indices in
/// [0, k), `w` non-negative row weights (rows with weight 0 are ignored).
/// Leaves hold the weighted class distribution. Splits minimize the
/// weighted Gini impurity of the children; thresholds are midpoints between
/// adjacent distinct values. Ties keep the first candidate found (lowest
/// feature index, then lowest threshold).
inline Tree fit_cart(std::span<const double> x, std::size_t p, std::span<const int> y, std::span<const double> w,
                     int k, const CartOptions& opt) {
  Tree tree;
  tree.width = k;
  std::vector<std::size_t> all;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (w[i] > 0.0) all.push_back(i);

  struct Work {
    int node;
    std::vector<std::size_t> rows;
    std::size_t depth;
  };
  std::vector<Work> stack;
  stack.push_back({tree.add_node(), std::move(all), 0});
  Rng rng(opt.seed);
  std::vector<std::size_t> features(p);
  std::vector<std::pair<double, std::size_t>> sorted;
  std::vector<double> total(static_cast<std::size_t>(k)), lc(static_cast<std::size_t>(k)), dist(static_cast<std::size_t>(k));

  while (!stack.empty()) {
    Work job = std::move(stack.back());
    stack.pop_back();
    std::fill(total.begin(), total.end(), 0.0);
    double wsum = 0.0;
    for (const auto r : job.rows) {
      total[static_cast<std::size_t>(y[r])] += w[r];
      wsum += w[r];
    }
    const auto make_leaf = [&] {
      for (int c = 0; c < k; ++c) dist[static_cast<std::size_t>(c)] = wsum > 0 ? total[static_cast<std::size_t>(c)] / wsum : 1.0 / k;
      tree.make_leaf(job.node, dist);
    };
    int present = 0;
    for (const double t : total) present += t > 0.0;
    if (present <= 1 || job.rows.size() < 2 || (opt.max_depth && job.depth >= opt.max_depth) ||
        wsum < 2.0 * opt.min_samples_leaf) {
      make_leaf();
      continue;
    }

    std::iota(features.begin(), features.end(), std::size_t{0});
    const std::size_t mtry = opt.max_features && opt.max_features < p ? opt.max_features : p;
    if (mtry < p) {
      // Partial Fisher-Yates for the whole order; features beyond mtry are
      // only consulted when none of the first mtry can split.
      for (std::size_t i = 0; i + 1 < p; ++i) std::swap(features[i], features[i + rng.below(p - i)]);
    }

    double total_sq = 0.0;
    for (const double t : total) total_sq += t * t;
    double best_score = -1.0;  // maximize sum_sq_l / w_l + sum_sq_r / w_r
    int best_feature = -1;
    double best_threshold = 0.0;
    for (std::size_t fi = 0; fi < p; ++fi) {
      if (fi >= mtry && best_feature >= 0) break;
      const std::size_t f = features[fi];
      sorted.clear();
      for (const auto r : job.rows) sorted.emplace_back(x[r * p + f], r);
      std::sort(sorted.begin(), sorted.end());
      if (sorted.front().first == sorted.back().first) continue;
      std::fill(lc.begin(), lc.end(), 0.0);
      double wl = 0.0, sq_l = 0.0, sq_r = total_sq;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const std::size_t r = sorted[i].second;
        const auto c = static_cast<std::size_t>(y[r]);
        const double wr_c = total[c] - lc[c];
        sq_r += (wr_c - w[r]) * (wr_c - w[r]) - wr_c * wr_c;
        sq_l += (lc[c] + w[r]) * (lc[c] + w[r]) - lc[c] * lc[c];
        lc[c] += w[r];
        wl += w[r];
        if (sorted[i].first == sorted[i + 1].first) continue;
        const double wr = wsum - wl;
        if (wl < opt.min_samples_leaf || wr < opt.min_samples_leaf) continue;
        const double score = sq_l / wl + sq_r / wr;
        if (score > best_score) {
          best_score = score;
          best_feature = static_cast<int>(f);
          best_threshold = midpoint_threshold(sorted[i].first, sorted[i + 1].first);
        }
      }
    }
    if (best_feature < 0) {
      make_leaf();
      continue;
    }
    std::vector<std::size_t> lrows, rrows;
    for (const auto r : job.rows)
      (x[r * p + static_cast<std::size_t>(best_feature)] < best_threshold ? lrows : rrows).push_back(r);
    const int l = tree.add_node();
    const int rn = tree.add_node();
    tree.feature[job.node] = best_feature;
    tree.threshold[job.node] = best_threshold;
    tree.left[job.node] = l;
    tree.right[job.node] = rn;
    stack.push_back({rn, std::move(rrows), job.depth + 1});
    stack.push_back({l, std::move(lrows), job.depth + 1});
  }
  return tree;
}

// ---------------------------------------------------------------------------
// Histogram regression tree (second-order boosting)
// ---------------------------------------------------------------------------

/// Per-feature quantile cut points; bin(x) = number of cuts <= x, so the
/// split "bin <= c" is the raw test "x < cuts[c]".
struct BinMapper {
  std::vector<std::vector<double>> cuts;

  static BinMapper fit(std::span<const double> x, std::size_t n, std::size_t p, std::size_t max_bins = 256) {
    BinMapper m;
    m.cuts.resize(p);
    std::vector<double> col(n);
    for (std::size_t f = 0; f < p; ++f) {
      for (std::size_t i = 0; i < n; ++i) col[i] = x[i * p + f];
      std::sort(col.begin(), col.end());
      std::vector<double> distinct;
      for (const double v : col)
        if (distinct.empty() || v != distinct.back()) distinct.push_back(v);
      auto& c = m.cuts[f];
      if (distinct.size() <= max_bins) {
        for (std::size_t i = 0; i + 1 < distinct.size(); ++i) c.push_back(midpoint_threshold(distinct[i], distinct[i + 1]));
      } else {
        for (std::size_t q = 1; q < max_bins; ++q) {
          const double v = col[q * n / max_bins];
          if (v != col.front() && (c.empty() || v > c.back())) c.push_back(v);
        }
      }
    }
    return m;
  }

  std::uint8_t bin(std::size_t f, double v) const {
    return static_cast<std::uint8_t>(std::upper_bound(cuts[f].begin(), cuts[f].end(), v) - cuts[f].begin());
  }

  std::vector<std::uint8_t> transform(std::span<const double> x, std::size_t n, std::size_t p) const {
    std::vector<std::uint8_t> out(n * p);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t f = 0; f < p; ++f) out[i * p + f] = bin(f, x[i * p + f]);
    return out;
  }
};

struct HistTreeOptions {
  std::size_t max_depth = 6;
  double lambda = 1.0;
  double min_child_weight = 1.0;
  double min_split_gain = 1e-6;
  double learning_rate = 0.3;
};

/// Grows one depth-wise regression tree on gradient/hessian pairs using
/// binned features. Leaf value = -lr * G / (H + lambda).
inline Tree fit_hist_tree(std::span<const std::uint8_t> bins, std::size_t p, const BinMapper& mapper,
                          std::span<const std::size_t> rows, std::span<const double> g, std::span<const double> h,
                          const HistTreeOptions& opt) {
  std::vector<std::size_t> offset(p + 1, 0);
  for (std::size_t f = 0; f < p; ++f) offset[f + 1] = offset[f] + mapper.cuts[f].size() + 1;
  const std::size_t hist_size = offset[p];

  struct Node {
    int id;
    std::vector<std::size_t> rows;
    std::vector<double> hist;  // interleaved (G, H) per bin
    double G, H;
  };
  const auto build = [&](const std::vector<std::size_t>& rs) {
    std::vector<double> hist(2 * hist_size, 0.0);
    for (const auto r : rs) {
      const std::uint8_t* b = bins.data() + r * p;
      const double gr = g[r], hr = h[r];
      for (std::size_t f = 0; f < p; ++f) {
        double* cell = hist.data() + 2 * (offset[f] + b[f]);
        cell[0] += gr;
        cell[1] += hr;
      }
    }
    return hist;
  };
  const auto score = [&](double G, double H) { return G * G / (H + opt.lambda); };

  Tree tree;
  tree.width = 1;
  std::vector<Node> level;
  {
    Node root{tree.add_node(), {rows.begin(), rows.end()}, {}, 0.0, 0.0};
    for (const auto r : root.rows) {
      root.G += g[r];
      root.H += h[r];
    }
    root.hist = build(root.rows);
    level.push_back(std::move(root));
  }
  for (std::size_t depth = 0; !level.empty(); ++depth) {
    std::vector<Node> next;
    for (auto& node : level) {
      int best_f = -1;
      std::size_t best_c = 0;
      double best_gain = opt.min_split_gain;
      double bGL = 0, bHL = 0;
      if (depth < opt.max_depth && node.rows.size() >= 2) {
        const double parent = score(node.G, node.H);
        for (std::size_t f = 0; f < p; ++f) {
          double GL = 0.0, HL = 0.0;
          const std::size_t nb = mapper.cuts[f].size();
          for (std::size_t c = 0; c < nb; ++c) {
            GL += node.hist[2 * (offset[f] + c)];
            HL += node.hist[2 * (offset[f] + c) + 1];
            const double GR = node.G - GL, HR = node.H - HL;
            if (HL < opt.min_child_weight || HR < opt.min_child_weight) continue;
            const double gain = score(GL, HL) + score(GR, HR) - parent;
            if (gain > best_gain) {
              best_gain = gain;
              best_f = static_cast<int>(f);
              best_c = c;
              bGL = GL;
              bHL = HL;
            }
          }
        }
      }
      if (best_f < 0) {
        const double v = -opt.learning_rate * node.G / (node.H + opt.lambda);
        tree.make_leaf(node.id, std::span<const double>(&v, 1));
        continue;
      }
      Node l{tree.add_node(), {}, {}, bGL, bHL};
      Node r{tree.add_node(), {}, {}, node.G - bGL, node.H - bHL};
      tree.feature[node.id] = best_f;
      tree.threshold[node.id] = mapper.cuts[static_cast<std::size_t>(best_f)][best_c];
      tree.left[node.id] = l.id;
      tree.right[node.id] = r.id;
      for (const auto row : node.rows)
        (bins[row * p + static_cast<std::size_t>(best_f)] <= best_c ? l.rows : r.rows).push_back(row);
      // Sums recomputed from rows so leaf values do not drift through
      // histogram subtraction.
      l.G = l.H = r.G = r.H = 0.0;
      for (const auto row : l.rows) {
        l.G += g[row];
        l.H += h[row];
      }
      for (const auto row : r.rows) {
        r.G += g[row];
        r.H += h[row];
      }
      if (depth + 1 < opt.max_depth) {
        Node& small = l.rows.size() <= r.rows.size() ? l : r;
        Node& large = l.rows.size() <= r.rows.size() ? r : l;
        small.hist = build(small.rows);
        large.hist = std::move(node.hist);
        for (std::size_t i = 0; i < large.hist.size(); ++i) large.hist[i] -= small.hist[i];
      }
      node.hist.clear();
      next.push_back(std::move(l));
      next.push_back(std::move(r));
    }
    level = std::move(next);
  }
  return tree;
}

}  // namespace vpf
