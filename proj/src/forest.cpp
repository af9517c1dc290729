#include "predho/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace predho {
namespace {

struct Row {
  const double* x;
  bool loss;
};

class TreeBuilder {
 public:
  TreeBuilder(std::size_t n_features, std::size_t mtry, std::uint64_t seed)
      : n_features_(n_features), mtry_(mtry), rng_(seed) {
    candidates_.resize(n_features);
    std::iota(candidates_.begin(), candidates_.end(), 0);
  }

  DecisionTree build(std::vector<Row> rows) {
    tree_.nodes.clear();
    grow(rows, 0, rows.size());
    return std::move(tree_);
  }

 private:
  int grow(std::vector<Row>& rows, std::size_t begin, std::size_t end) {
    TreeNode node;
    for (std::size_t i = begin; i < end; ++i) ++node.counts[rows[i].loss];
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(node);
    if (node.counts[0] == 0 || node.counts[1] == 0 || end - begin < 2) {
      return id;
    }

    // Partial Fisher-Yates draw of mtry candidate features.
    for (std::size_t i = 0; i < mtry_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n_features_ - 1);
      std::swap(candidates_[i], candidates_[pick(rng_)]);
    }

    const double parent = gini(node.counts[0], node.counts[1]);
    const double n = static_cast<double>(end - begin);
    double best_score = parent;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, bool>> col(end - begin);
    for (std::size_t c = 0; c < mtry_; ++c) {
      const std::size_t f = candidates_[c];
      for (std::size_t i = begin; i < end; ++i) {
        col[i - begin] = {rows[i].x[f], rows[i].loss};
      }
      std::sort(col.begin(), col.end());
      std::array<std::uint32_t, 2> left{};
      for (std::size_t i = 0; i + 1 < col.size(); ++i) {
        ++left[col[i].second];
        if (col[i].first == col[i + 1].first) continue;
        const std::uint32_t nl = left[0] + left[1];
        const std::uint32_t nr = static_cast<std::uint32_t>(col.size()) - nl;
        const double score =
            (nl * gini(left[0], left[1]) +
             nr * gini(node.counts[0] - left[0], node.counts[1] - left[1])) /
            n;
        if (score < best_score) {
          best_score = score;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (col[i].first + col[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return id;

    auto mid = std::partition(
        rows.begin() + static_cast<long>(begin),
        rows.begin() + static_cast<long>(end), [&](const Row& r) {
          return r.x[best_feature] <= best_threshold;
        });
    const auto split = static_cast<std::size_t>(mid - rows.begin());
    const int left_id = grow(rows, begin, split);
    const int right_id = grow(rows, split, end);
    auto& stored = tree_.nodes[static_cast<std::size_t>(id)];
    stored.feature = best_feature;
    stored.threshold = best_threshold;
    stored.left = left_id;
    stored.right = right_id;
    return id;
  }

  std::size_t n_features_;
  std::size_t mtry_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> candidates_;
  DecisionTree tree_;
};

}  // namespace

double gini(std::uint32_t stable, std::uint32_t loss) {
  const double n = static_cast<double>(stable) + loss;
  if (n == 0.0) return 0.0;
  const double p0 = stable / n;
  const double p1 = loss / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

bool DecisionTree::votes_loss(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(
        x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                              : n.right);
  }
  return nodes[i].counts[1] >= nodes[i].counts[0];
}

double ForestModel::predict(std::span<const double> x) const {
  if (x.size() != n_features) {
    throw SchemaError("forest expects " + std::to_string(n_features) +
                      " inputs, got " + std::to_string(x.size()));
  }
  if (trees.empty()) throw SchemaError("forest has no trees");
  std::size_t votes = 0;
  for (const auto& t : trees) votes += t.votes_loss(x) ? 1 : 0;
  return static_cast<double>(votes) / static_cast<double>(trees.size());
}

double forest_predict(const ForestModel& model, std::span<const double> x) {
  return model.predict(x);
}

std::vector<std::size_t> balanced_indices(const Dataset& dataset,
                                          std::uint64_t seed) {
  std::vector<std::size_t> stable;
  std::vector<std::size_t> loss;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (dataset.windows[i].label == Label::kLoss ? loss : stable).push_back(i);
  }
  auto& major = stable.size() >= loss.size() ? stable : loss;
  const auto& minor = stable.size() >= loss.size() ? loss : stable;
  std::mt19937_64 rng(seed);
  std::shuffle(major.begin(), major.end(), rng);
  major.resize(minor.size());
  std::vector<std::size_t> out(stable);
  out.insert(out.end(), loss.begin(), loss.end());
  std::sort(out.begin(), out.end());
  return out;
}

ForestModel forest_train(const Dataset& dataset, const TrainConfig& config) {
  if (dataset.empty()) throw Error("cannot train on an empty dataset");
  const std::size_t n_loss = dataset.count(Label::kLoss);
  if (n_loss == 0 || n_loss == dataset.size()) {
    throw Error("forest training needs both LOSS and STABLE windows");
  }
  std::vector<std::size_t> pool;
  if (config.balance) {
    pool = balanced_indices(dataset, derive_seed(config.seed, "balance"));
  } else {
    pool.resize(dataset.size());
    std::iota(pool.begin(), pool.end(), 0);
  }

  ForestModel model;
  model.n_features = dataset.windows.front().values.size();
  const auto mtry = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::floor(std::sqrt(static_cast<double>(model.n_features)))));
  std::mt19937_64 boot_rng(derive_seed(config.seed, "bootstrap"));
  std::uniform_int_distribution<std::size_t> draw(0, pool.size() - 1);
  for (std::size_t t = 0; t < kForestTrees; ++t) {
    std::vector<Row> rows;
    rows.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const auto& w = dataset.windows[pool[draw(boot_rng)]];
      rows.push_back({w.values.data(), w.label == Label::kLoss});
    }
    TreeBuilder builder(model.n_features, mtry,
                        derive_seed(config.seed, "tree/" + std::to_string(t)));
    model.trees.push_back(builder.build(std::move(rows)));
  }
  return model;
}

}  // namespace predho
