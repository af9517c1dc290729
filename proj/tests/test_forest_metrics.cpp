#include <cmath>
#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "predho/forest.hpp"
#include "predho/metrics.hpp"

using namespace predho;

namespace {

Dataset one_feature(std::size_t n, double cut, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  Dataset d;
  d.config.observation_window = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureWindow w;
    w.values = {u(rng)};
    w.label = w.values[0] > cut ? Label::kLoss : Label::kStable;
    d.add(w, "u");
  }
  return d;
}

Dataset noisy(std::size_t n, std::size_t d_feat, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Dataset d;
  d.config.observation_window = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureWindow w;
    for (std::size_t j = 0; j < d_feat; ++j) w.values.push_back(nd(rng));
    w.label = w.values[0] + 0.8 * nd(rng) > 0.5 ? Label::kLoss : Label::kStable;
    d.add(w, "u");
  }
  return d;
}

}  // namespace

TEST(Gini, Formula) {
  EXPECT_DOUBLE_EQ(gini(5, 5), 0.5);
  EXPECT_DOUBLE_EQ(gini(10, 0), 0.0);
  EXPECT_DOUBLE_EQ(gini(0, 7), 0.0);
  EXPECT_DOUBLE_EQ(gini(1, 3), 1.0 - (0.0625 + 0.5625));
}

TEST(Forest, SeparableStump) {
  const auto d = one_feature(400, 6.3, 1);
  TrainConfig tc;
  tc.seed = 2;
  const auto f = forest_train(d, tc);
  ASSERT_EQ(f.trees.size(), kForestTrees);
  // Bootstrap samples see slightly different gaps around the cut, so each
  // root threshold lands near it rather than on it.
  for (const auto& t : f.trees) {
    ASSERT_FALSE(t.nodes[0].is_leaf());
    EXPECT_EQ(t.nodes[0].feature, 0);
    EXPECT_NEAR(t.nodes[0].threshold, 6.3, 0.5);
    EXPECT_TRUE(t.nodes[t.nodes[0].left].is_leaf());
    EXPECT_TRUE(t.nodes[t.nodes[0].right].is_leaf());
  }
  const auto test = one_feature(300, 6.3, 3);
  std::size_t checked = 0;
  for (const auto& w : test.windows) {
    if (std::abs(w.values[0] - 6.3) < 0.5) continue;
    ++checked;
    EXPECT_EQ(forest_predict(f, w.values) >= 0.5, w.label == Label::kLoss);
  }
  EXPECT_GT(checked, 250u);
}

TEST(Forest, PredictionsOnTenthGrid) {
  const auto d = noisy(300, 9, 4);
  TrainConfig tc;
  tc.seed = 5;
  const auto f = forest_train(d, tc);
  const auto probe = noisy(200, 9, 6);
  for (const auto& w : probe.windows) {
    const double p = forest_predict(f, w.values);
    const double k = p * 10.0;
    EXPECT_NEAR(k, std::round(k), 1e-12);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(Forest, BalancedDownsample) {
  Dataset d;
  d.config.observation_window = 1.0;
  for (int i = 0; i < 1000; ++i) {
    FeatureWindow w;
    w.values = {double(i)};
    w.label = i < 900 ? Label::kStable : Label::kLoss;
    d.add(w, "u");
  }
  const auto idx = balanced_indices(d, 3);
  std::size_t stable = 0, loss = 0;
  for (auto i : idx) (i < 900 ? stable : loss)++;
  EXPECT_EQ(stable, 100u);
  EXPECT_EQ(loss, 100u);
  EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
  EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 200u);
}

TEST(Forest, Deterministic) {
  const auto d = noisy(200, 4, 7);
  TrainConfig tc;
  tc.seed = 8;
  const auto a = forest_train(d, tc);
  const auto b = forest_train(d, tc);
  EXPECT_EQ(a.trees, b.trees);
}

TEST(Forest, SingleClassRejected) {
  auto d = one_feature(50, 100.0, 1);  // all STABLE
  EXPECT_THROW(forest_train(d, TrainConfig{}), Error);
}

TEST(Forest, WrongWidthRejected) {
  const auto f = forest_train(one_feature(100, 5.0, 1), TrainConfig{});
  EXPECT_THROW(forest_predict(f, std::vector<double>{1.0, 2.0}), SchemaError);
}

TEST(Metrics, PrecisionRecallToF1) {
  // tp = 9215, fp = 285, fn = 485: 9215/9500 = 0.97, 9215/9700 = 0.95.
  const auto r = EvalReport::from_confusion(9215, 285, 485, 20000);
  EXPECT_DOUBLE_EQ(r.loss_precision, 0.97);
  EXPECT_DOUBLE_EQ(r.loss_recall, 0.95);
  EXPECT_NEAR(r.f1_loss, 0.96, 0.005);
  EXPECT_NEAR(f1_score(0.97, 0.95), 2 * 0.97 * 0.95 / 1.92, 1e-15);
}

TEST(Metrics, AllCorrect) {
  const std::vector<double> p = {0.9, 0.1, 0.6, 0.2};
  const std::vector<Label> y = {Label::kLoss, Label::kStable, Label::kLoss,
                                Label::kStable};
  const auto r = evaluate(p, y);
  EXPECT_EQ(r.loss_precision, 1.0);
  EXPECT_EQ(r.loss_recall, 1.0);
  EXPECT_EQ(r.stable_precision, 1.0);
  EXPECT_EQ(r.stable_recall, 1.0);
  EXPECT_EQ(r.f1_loss, 1.0);
  EXPECT_EQ(r.accuracy, 1.0);
}

TEST(Metrics, ConfusionArithmetic) {
  const auto r = EvalReport::from_confusion(19, 1, 2, 78);
  EXPECT_DOUBLE_EQ(r.loss_precision, 19.0 / 20.0);
  EXPECT_DOUBLE_EQ(r.loss_recall, 19.0 / 21.0);
  EXPECT_NEAR(r.loss_recall, 0.9048, 5e-5);
  EXPECT_DOUBLE_EQ(r.stable_precision, 78.0 / 80.0);
  EXPECT_DOUBLE_EQ(r.stable_recall, 78.0 / 79.0);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.97);
}

TEST(Metrics, ThresholdMonotoneRecall) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(500);
  std::vector<Label> y(500);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = u(rng);
    y[i] = u(rng) < p[i] ? Label::kLoss : Label::kStable;
  }
  double prev = 2.0;
  for (int k = 0; k <= 100; ++k) {
    const double r = evaluate(p, y, k / 100.0).loss_recall;
    EXPECT_LE(r, prev);
    prev = r;
  }
}

TEST(Metrics, BoundaryCountsAsLoss) {
  const std::vector<double> p = {0.5};
  const std::vector<Label> y = {Label::kLoss};
  EXPECT_EQ(evaluate(p, y).tp, 1u);
}

TEST(Metrics, BadInputs) {
  const std::vector<double> p = {0.5, 0.2};
  const std::vector<Label> y = {Label::kLoss};
  EXPECT_THROW(evaluate(p, y), Error);
  const std::vector<Label> unk = {Label::kLoss, Label::kUnknown};
  EXPECT_THROW(evaluate(p, unk), SchemaError);
}
