#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "predho/features.hpp"
#include "predho/mlp.hpp"

namespace predho {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  std::array<std::uint32_t, 2> counts{};  // {STABLE, LOSS} training rows

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  // True if the reached leaf votes LOSS (ties vote LOSS).
  bool votes_loss(std::span<const double> x) const;
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::size_t n_features = 0;

  // Fraction of trees voting LOSS.
  double predict(std::span<const double> x) const;
};

inline constexpr std::size_t kForestTrees = 10;

// 1 - sum(p_i^2) over the two classes.
double gini(std::uint32_t stable, std::uint32_t loss);

// Indices of a class-balanced subset: the majority class is sampled down to
// the minority count without replacement. Result is sorted.
std::vector<std::size_t> balanced_indices(const Dataset& dataset,
                                          std::uint64_t seed);

// Ten Gini trees on bootstrap samples with sqrt(d) candidate features per
// split. Honors config.balance. Throws on single-class data.
ForestModel forest_train(const Dataset& dataset, const TrainConfig& config);

double forest_predict(const ForestModel& model, std::span<const double> x);

}  // namespace predho
