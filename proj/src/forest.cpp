#include "dualkge/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dualkge/error.hpp"
#include "dualkge/parallel.hpp"
#include "dualkge/random.hpp"

namespace dualkge {

void ForestConfig::validate() const {
  if (n_trees < 1) throw ArgumentError("forest needs at least one tree");
  if (min_samples_split < 2) throw ArgumentError("min_samples_split must be at least 2");
}

int DecisionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& node = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right);
  }
  return nodes[i].counts[1] > nodes[i].counts[0] ? 1 : 0;
}

std::size_t DecisionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (nodes[i].feature >= 0) {
      stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
    }
  }
  return best;
}

namespace {

double gini(double n0, double n1) {
  const double n = n0 + n1;
  if (n <= 0.0) return 0.0;
  const double p0 = n0 / n, p1 = n1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const int> y, const ForestConfig& cfg, std::size_t features_per_split,
              std::uint64_t seed)
      : x_(x), y_(y), cfg_(cfg), mtry_(features_per_split), rng_(seed) {}

  DecisionTree build() {
    const std::size_t n = x_.rows();
    std::vector<std::size_t> sample(n);
    for (auto& s : sample) s = uniform_index(rng_, n);
    feature_order_.resize(x_.cols());
    std::iota(feature_order_.begin(), feature_order_.end(), std::size_t{0});
    tree_.nodes.emplace_back();
    grow(0, sample, 0);
    return std::move(tree_);
  }

 private:
  void grow(std::size_t node_index, std::vector<std::size_t>& sample, std::size_t depth) {
    std::array<std::uint32_t, 2> counts{0, 0};
    for (const auto s : sample) ++counts[static_cast<std::size_t>(y_[s])];
    tree_.nodes[node_index].counts = counts;
    const bool pure = counts[0] == 0 || counts[1] == 0;
    const bool depth_stop = cfg_.max_depth && depth >= *cfg_.max_depth;
    if (pure || depth_stop || sample.size() < cfg_.min_samples_split) return;

    // Partial Fisher-Yates for the feature subset of this node.
    for (std::size_t k = 0; k < mtry_; ++k) {
      const std::size_t j = k + uniform_index(rng_, feature_order_.size() - k);
      std::swap(feature_order_[k], feature_order_[j]);
    }
    std::vector<std::size_t> subset(feature_order_.begin(), feature_order_.begin() + static_cast<std::ptrdiff_t>(mtry_));
    std::sort(subset.begin(), subset.end());

    const double n = static_cast<double>(sample.size());
    const double parent = gini(counts[0], counts[1]);
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, int>> column(sample.size());
    for (const std::size_t f : subset) {
      for (std::size_t k = 0; k < sample.size(); ++k) column[k] = {x_(sample[k], f), y_[sample[k]]};
      std::sort(column.begin(), column.end());
      double left0 = 0.0, left1 = 0.0;
      for (std::size_t k = 0; k + 1 < column.size(); ++k) {
        (column[k].second == 0 ? left0 : left1) += 1.0;
        if (column[k].first == column[k + 1].first) continue;
        const double nl = left0 + left1;
        const double nr = n - nl;
        const double impurity = (nl * gini(left0, left1) + nr * gini(counts[0] - left0, counts[1] - left1)) / n;
        const double gain = parent - impurity;
        if (gain > best_gain + 1e-15) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (column[k].first + column[k + 1].first);
          // Guard the midpoint against rounding onto the right-hand value.
          if (!(best_threshold < column[k + 1].first)) best_threshold = column[k].first;
        }
      }
    }
    if (best_feature < 0) return;

    std::vector<std::size_t> left, right;
    for (const auto s : sample) {
      (x_(s, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right).push_back(s);
    }
    sample.clear();
    sample.shrink_to_fit();

    const auto left_index = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const auto right_index = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    auto& node = tree_.nodes[node_index];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left_index;
    node.right = right_index;
    grow(static_cast<std::size_t>(left_index), left, depth + 1);
    grow(static_cast<std::size_t>(right_index), right, depth + 1);
  }

  const Matrix& x_;
  std::span<const int> y_;
  const ForestConfig& cfg_;
  std::size_t mtry_;
  Rng rng_;
  std::vector<std::size_t> feature_order_;
  DecisionTree tree_;
};

}  // namespace

Forest forest_train(const Matrix& features, std::span<const int> labels, const ForestConfig& cfg) {
  cfg.validate();
  if (features.rows() != labels.size()) throw ArgumentError("feature rows and labels differ in length");
  if (features.rows() < 2) throw TrainingError("forest needs at least 2 examples");
  if (features.cols() == 0) throw ArgumentError("forest needs at least one feature");
  std::size_t ones = 0;
  for (const int y : labels) {
    if (y != 0 && y != 1) throw ArgumentError("labels must be 0 or 1");
    ones += static_cast<std::size_t>(y);
  }
  if (ones == 0 || ones == labels.size()) throw TrainingError("forest training data contains a single class");

  std::size_t mtry = cfg.features_per_split;
  if (mtry == 0) mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(features.cols()))));
  mtry = std::min(mtry, features.cols());

  Forest forest;
  forest.n_features = features.cols();
  forest.trees.resize(cfg.n_trees);
  parallel_for(cfg.n_trees, cfg.threads, [&](std::size_t t) {
    forest.trees[t] = TreeBuilder(features, labels, cfg, mtry, mix_seed(cfg.seed, t)).build();
  });
  return forest;
}

Prediction forest_predict(const Forest& forest, std::span<const double> features) {
  if (features.size() != forest.n_features) {
    throw ArgumentError("feature width " + std::to_string(features.size()) + " does not match forest width " +
                        std::to_string(forest.n_features));
  }
  std::size_t votes = 0;
  for (const auto& tree : forest.trees) votes += static_cast<std::size_t>(tree.predict(features));
  Prediction p;
  p.score = static_cast<double>(votes) / static_cast<double>(forest.trees.size());
  p.label = 2 * votes > forest.trees.size() ? 1 : 0;
  return p;
}

}  // namespace dualkge
