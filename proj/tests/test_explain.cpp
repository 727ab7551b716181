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

#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "vpf/vpf.hpp"

namespace {

using namespace vpf;

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::function<double(const std::vector<double>&)> as_vec(const ValueFunction& f) {
  return [f](const std::vector<double>& z) { return f(z); };
}

// f = 1 when x0 and x1 are both set, plus x2 on its own.
const ValueFunction kTable = [](std::span<const double> z) { return (z[0] > 0.5 && z[1] > 0.5 ? 1.0 : 0.0) + z[2]; };

TEST(ExactShapley, HandTable) {
  const std::vector<double> x = {1, 1, 1};
  const auto bg = Background::from_rows({{0, 0, 0}});
  const auto a = exact_shapley(kTable, x, bg);
  // The AND term splits evenly between x0 and x1.
  EXPECT_NEAR(a.phi[0], 0.5, 1e-15);
  EXPECT_NEAR(a.phi[1], 0.5, 1e-15);
  EXPECT_NEAR(a.phi[2], 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(a.base_value, 0.0);
  EXPECT_DOUBLE_EQ(a.prediction, 2.0);
}

TEST(ExactShapley, MatchesPermutationOracle) {
  Rng rng(31);
  for (int t = 0; t < 30; ++t) {
    const std::size_t d = 2 + rng.below(5);
    std::vector<double> w(d * d);
    for (auto& v : w) v = rng.uniform() - 0.5;
    const ValueFunction f = [w, d](std::span<const double> z) {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) s += w[i * d + j] * z[i] * (i == j ? 1.0 : z[j]);
      return std::tanh(s);
    };
    std::vector<double> x(d);
    for (auto& v : x) v = rng.uniform() * 2 - 1;
    std::vector<std::vector<double>> bg_rows(3, std::vector<double>(d));
    for (auto& r : bg_rows)
      for (auto& v : r) v = rng.uniform() * 2 - 1;
    const auto got = exact_shapley(f, x, Background::from_rows(bg_rows)).phi;
    const auto want = oracle::permutation_shapley(as_vec(f), x, bg_rows);
    for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(got[j], want[j], 1e-12);
  }
}

// Efficiency, symmetry and dummy on random instances.
TEST(ExactShapley, PropertyAxioms) {
  Rng rng(32);
  for (int t = 0; t < 50; ++t) {
    const std::size_t d = 3 + rng.below(4);
    const double a = rng.uniform(), b = rng.uniform();
    // x0 and x1 enter symmetrically; the last feature is ignored.
    const ValueFunction f = [a, b](std::span<const double> z) {
      return a * (z[0] + z[1]) + b * z[0] * z[1] + (z.size() > 3 ? z[2] * z[0] : 0.0);
    };
    std::vector<double> x(d, 0.0);
    x[0] = x[1] = rng.uniform();
    for (std::size_t j = 2; j < d; ++j) x[j] = rng.uniform();
    std::vector<std::vector<double>> bg_rows(2, std::vector<double>(d));
    for (auto& r : bg_rows) {
      r[0] = r[1] = rng.uniform();
      for (std::size_t j = 2; j < d; ++j) r[j] = rng.uniform();
    }
    const auto bg = Background::from_rows(bg_rows);
    const auto att = exact_shapley(f, x, bg);
    EXPECT_NEAR(sum(att.phi), att.prediction - att.base_value, 1e-12);
    if (d == 3) EXPECT_NEAR(att.phi[0], att.phi[1], 1e-12);
    EXPECT_NEAR(att.phi[d - 1], 0.0, 1e-15);
  }
}

// For an additive f with a zero background every marginal contribution is
// the feature's own term, so the sampler is exact for any sample count.
TEST(SamplingShapley, AdditiveIsExactForAnyM) {
  const ValueFunction f = [](std::span<const double> z) { return 3 * z[0] - 2 * z[1] + 0.5 * z[2]; };
  const std::vector<double> x = {1.5, 2.0, -4.0};
  const auto bg = Background::from_rows({{0, 0, 0}});
  for (const std::size_t m : {1, 2, 7, 50}) {
    const auto a = shapley_sampling(f, x, bg, m, 99);
    EXPECT_EQ(a.phi, (std::vector<double>{4.5, -4.0, -2.0}));
    EXPECT_EQ(a.std_error, (std::vector<double>{0, 0, 0}));
  }
}

TEST(SamplingShapley, ConvergesToOracle) {
  const ValueFunction f = [](std::span<const double> z) { return z[0] * z[1] + std::max(z[2], z[0]) - z[3]; };
  const std::vector<double> x = {1.0, 2.0, 0.5, 1.0};
  const std::vector<std::vector<double>> bg_rows = {{0, 0, 0, 0}, {1, -1, 2, 0}, {0.5, 0.5, -1, 2}};
  const auto want = oracle::permutation_shapley(as_vec(f), x, bg_rows);
  const auto a = shapley_sampling(f, x, Background::from_rows(bg_rows), 4000, 5);
  for (std::size_t j = 0; j < x.size(); ++j) EXPECT_NEAR(a.phi[j], want[j], 4 * a.std_error[j] + 1e-12) << j;
  EXPECT_EQ(a.phi, shapley_sampling(f, x, Background::from_rows(bg_rows), 4000, 5).phi);
}

TEST(Shapley, Errors) {
  const ValueFunction f = [](std::span<const double> z) { return z[0]; };
  EXPECT_THROW(exact_shapley(f, std::vector<double>(13, 0.0), Background::from_rows({std::vector<double>(13, 0.0)})),
               TooManyFeatures);
  EXPECT_THROW(exact_shapley(f, std::vector<double>{1.0}, Background{}), EmptyBackground);
  EXPECT_THROW(shapley_sampling(f, std::vector<double>{1.0}, Background{}, 10, 1), EmptyBackground);
  EXPECT_THROW(shapley_sampling(f, std::vector<double>{1.0, 2.0}, Background::from_rows({{0.0}}), 10, 1),
               FeatureCountMismatch);
}

TEST(Background, EvenlySpacedCanonicalRows) {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({static_cast<double>(i)});
  const auto m = fixtures::matrix(rows, std::vector<int>(10, 1));
  const auto bg = sample_background(m, 4);
  EXPECT_EQ(bg.x, (std::vector<double>{0, 2, 5, 7}));
  EXPECT_EQ(sample_background(m, 100).size(), 10U);
  EXPECT_THROW(sample_background(fixtures::matrix({}, {}), 3), EmptyBackground);
}

// ---------------------------------------------------------------------------
// Beeswarm ranking
// ---------------------------------------------------------------------------

Attribution attr(const char* key, std::vector<double> phi) {
  Attribution a;
  a.row_key = key;
  a.class_code = 1;
  a.phi = std::move(phi);
  return a;
}

TEST(Importance, RankedByMeanAbsolutePhi) {
  const std::vector<Attribution> atts = {attr("a", {0.1, -0.5, 0.2}), attr("b", {0.1, 0.3, -0.4})};
  const auto r = feature_importance(atts, {"x", "y", "z"});
  ASSERT_EQ(r.size(), 3U);
  EXPECT_EQ(r[0].feature, "y");
  EXPECT_NEAR(r[0].mean_abs_phi, 0.4, 1e-15);
  EXPECT_EQ(r[1].feature, "z");
  EXPECT_EQ(r[2].feature, "x");
}

TEST(Importance, PropertyOrderIndependent) {
  Rng rng(41);
  std::vector<Attribution> atts;
  for (int i = 0; i < 30; ++i) {
    std::vector<double> phi(5);
    for (auto& v : phi) v = rng.uniform() - 0.5;
    atts.push_back(attr(("k" + std::to_string(i)).c_str(), phi));
  }
  const std::vector<std::string> names = {"a", "b", "c", "d", "e"};
  const auto base = format_feature_importance(feature_importance(atts, names));
  for (int t = 0; t < 10; ++t) {
    rng.shuffle(atts);
    EXPECT_EQ(format_feature_importance(feature_importance(atts, names)), base);
  }
}

TEST(Importance, BeeswarmRows) {
  const std::vector<Attribution> atts = {attr("V1|M1", {0.25, -1.0})};
  const auto bg = Background::from_rows({{0, 10}, {4, 10}});
  const auto text = beeswarm_export(atts, {{1.0, 10.0}}, {"f0", "f1"}, bg);
  EXPECT_EQ(text, "feature,phi,normalized_feature_value,row_key,class\nf0,0.25,0.25,V1|M1,For\nf1,-1,0.5,V1|M1,For\n");
}

// ---------------------------------------------------------------------------
// Misprediction report
// ---------------------------------------------------------------------------

EnrichedRecord cast(const char* vid, const char* mid, const char* party, VoteResult r) {
  EnrichedRecord e;
  e.vote.vote_id = vid;
  e.vote.member_id = mid;
  e.vote.member_name = std::string("Name ") + mid;
  e.vote.party_name = party;
  e.vote.vote_result = r;
  e.bill_id = std::string("B") + vid;
  e.title = std::string("Bill ") + vid;
  return e;
}

TEST(Anomalies, SixRowTally) {
  const auto F = VoteResult::kFor, A = VoteResult::kAgainst;
  // Party Red votes For on V1 except M3, who defects; Blue votes Against.
  const std::vector<EnrichedRecord> rs = {
      cast("V1", "M1", "Red", F), cast("V1", "M2", "Red", F),  cast("V1", "M3", "Red", A),
      cast("V1", "M4", "Blue", A), cast("V1", "M5", "Blue", A), cast("V1", "M6", "Blue", A),
  };
  // Predictions follow the party line, and M5 is also mispredicted.
  const std::vector<VotePrediction> preds = {
      {{"V1", "M1"}, 1}, {{"V1", "M2"}, 1}, {{"V1", "M3"}, 1},
      {{"V1", "M4"}, 2}, {{"V1", "M5"}, 1}, {{"V1", "M6"}, 2},
  };
  const auto rep = false_negative_report(preds, rs);
  ASSERT_EQ(rep.rows.size(), 2U);
  EXPECT_EQ(rep.rows[0].member_id, "M3");
  EXPECT_TRUE(rep.rows[0].is_defection);
  EXPECT_EQ(rep.rows[1].member_id, "M5");
  EXPECT_FALSE(rep.rows[1].is_defection);
  EXPECT_EQ(rep.defections(), 1U);
  ASSERT_EQ(rep.by_party.size(), 2U);
  EXPECT_EQ(rep.by_party[0].count, 1U);
  ASSERT_EQ(rep.by_bill.size(), 1U);
  EXPECT_EQ(rep.by_bill[0].key, "Bill V1");
  EXPECT_EQ(rep.by_bill[0].count, 2U);
  EXPECT_EQ(rep.by_bill[0].defections, 1U);
  const auto j = anomaly_groups_json(rep);
  EXPECT_EQ(j["mispredicted"], 2);
  EXPECT_EQ(j["defections"], 1);
  EXPECT_NE(format_anomalies(rep).find("V1,M3,Name M3,Red,BV1,Bill V1,Against,For,true"), std::string::npos);
}

TEST(Anomalies, AllCorrectGivesEmptyReport) {
  const std::vector<EnrichedRecord> rs = {cast("V1", "M1", "Red", VoteResult::kFor)};
  const auto rep = false_negative_report({{{"V1", "M1"}, 1}}, rs);
  EXPECT_TRUE(rep.rows.empty());
  EXPECT_TRUE(rep.by_party.empty());
}

TEST(Anomalies, ModalVoteTiesGoToLowerCode) {
  const std::vector<EnrichedRecord> rs = {cast("V1", "M1", "Red", VoteResult::kAgainst),
                                          cast("V1", "M2", "Red", VoteResult::kFor)};
  const auto modal = party_modal_votes(rs);
  EXPECT_EQ(modal.at({"BV1", "Red"}), 1);
}

}  // namespace
