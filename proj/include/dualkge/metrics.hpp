#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dualkge/matrix.hpp"

namespace dualkge {

struct ClassificationMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double weighted_f1 = 0.0;
  double auc = 0.0;
};

/// Support-weighted precision, recall and F1 over both classes, plus ROC AUC of
/// `scores` against `truth`. A class never predicted contributes precision 0.
ClassificationMetrics classification_metrics(std::span<const int> truth, std::span<const int> predicted,
                                             std::span<const double> scores);

/// Mann-Whitney AUC with midranks (tied scores count 1/2). Throws MetricError
/// unless both classes are present.
double roc_auc(std::span<const int> truth, std::span<const double> scores);

struct KruskalWallisResult {
  double h = 0.0;
  std::size_t df = 0;
  double critical_value = 0.0;
  bool significant = false;
};

/// Upper 5% points of chi-square for df = 1..10.
double chi_square_critical_005(std::size_t df);

/// Tie-corrected H statistic; significance at 0.05 against the chi-square table.
KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

struct ClusteringMetrics {
  double calinski_harabasz = 0.0;
  double davies_bouldin = 0.0;
  double silhouette = 0.0;
};

/// Euclidean clustering diagnostics of `points` grouped by `labels` (any ints).
ClusteringMetrics clustering_metrics(const Matrix& points, std::span<const int> labels);

/// Min-max scales values to [0, 1]; `invert` maps the smallest value to 1.
/// A constant column maps to all zeros.
std::vector<double> normalize_min_max(std::span<const double> values, bool invert = false);

/// Median of a non-empty sample (mean of the middle pair for even sizes).
double median(std::vector<double> values);

}  // namespace dualkge
