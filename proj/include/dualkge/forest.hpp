#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dualkge/matrix.hpp"

namespace dualkge {

struct ForestConfig {
  std::size_t n_trees = 100;
  /// Unset = grow until pure.
  std::optional<std::size_t> max_depth;
  std::size_t min_samples_split = 2;
  /// 0 = ceil(sqrt(n_features)).
  std::size_t features_per_split = 0;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
};

/// CART classification tree for binary labels. Internal nodes split on
/// feature <= threshold (left) / > threshold (right).
struct DecisionTree {
  struct Node {
    int feature = -1;  // -1 for a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::array<std::uint32_t, 2> counts{0, 0};
  };
  std::vector<Node> nodes;

  /// Majority class of the leaf reached by `x` (ties go to 0).
  int predict(std::span<const double> x) const;
  std::size_t depth() const;
};

struct Forest {
  std::vector<DecisionTree> trees;
  std::size_t n_features = 0;
};

struct Prediction {
  int label = 0;
  /// Fraction of trees voting 1.
  double score = 0.0;
};

/// Bootstrap-aggregated Gini CART trees. Each tree draws its bootstrap sample and
/// per-node feature subsets from its own seed stream, so results ignore `threads`.
Forest forest_train(const Matrix& features, std::span<const int> labels, const ForestConfig& cfg);

/// Majority vote (tie -> 0).
Prediction forest_predict(const Forest& forest, std::span<const double> features);

}  // namespace dualkge
