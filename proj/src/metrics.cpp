#include "dualkge/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "dualkge/error.hpp"
#include "dualkge/kernels.hpp"

namespace dualkge {

namespace {

/// 1-based midranks of `values`.
std::vector<double> midranks(std::span<const double> values, double* tie_term = nullptr) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  double ties = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    const double t = static_cast<double>(j - i + 1);
    ties += t * t * t - t;
    i = j + 1;
  }
  if (tie_term) *tie_term = ties;
  return ranks;
}

}  // namespace

double roc_auc(std::span<const int> truth, std::span<const double> scores) {
  if (truth.size() != scores.size()) throw ArgumentError("truth and scores differ in length");
  const auto ranks = midranks(scores);
  double n_pos = 0.0, n_neg = 0.0, rank_sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 1) {
      n_pos += 1.0;
      rank_sum += ranks[i];
    } else {
      n_neg += 1.0;
    }
  }
  if (n_pos == 0.0 || n_neg == 0.0) throw MetricError("AUC needs both classes in the true labels");
  const double u = rank_sum - n_pos * (n_pos + 1.0) / 2.0;
  return u / (n_pos * n_neg);
}

ClassificationMetrics classification_metrics(std::span<const int> truth, std::span<const int> predicted,
                                             std::span<const double> scores) {
  if (truth.size() != predicted.size() || truth.size() != scores.size()) {
    throw ArgumentError("label and score vectors differ in length");
  }
  if (truth.empty()) throw MetricError("no examples");
  // confusion[t][p]
  std::array<std::array<double, 2>, 2> confusion{};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    confusion[static_cast<std::size_t>(truth[i] != 0)][static_cast<std::size_t>(predicted[i] != 0)] += 1.0;
  }
  ClassificationMetrics m;
  const double n = static_cast<double>(truth.size());
  for (std::size_t c = 0; c < 2; ++c) {
    const double tp = confusion[c][c];
    const double support = confusion[c][0] + confusion[c][1];
    const double predicted_c = confusion[0][c] + confusion[1][c];
    const double precision = predicted_c > 0.0 ? tp / predicted_c : 0.0;
    const double recall = support > 0.0 ? tp / support : 0.0;
    const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    const double weight = support / n;
    m.precision += weight * precision;
    m.recall += weight * recall;
    m.weighted_f1 += weight * f1;
  }
  m.auc = roc_auc(truth, scores);
  return m;
}

double chi_square_critical_005(std::size_t df) {
  static constexpr std::array<double, 10> table{3.841, 5.991, 7.815, 9.488, 11.070,
                                                12.592, 14.067, 15.507, 16.919, 18.307};
  if (df < 1 || df > table.size()) {
    throw ArgumentError("chi-square table covers df 1..10, got " + std::to_string(df));
  }
  return table[df - 1];
}

KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw ArgumentError("Kruskal-Wallis needs at least 2 groups");
  std::vector<double> pooled;
  for (const auto& g : groups) {
    if (g.empty()) throw ArgumentError("Kruskal-Wallis groups must be non-empty");
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  double tie_term = 0.0;
  const auto ranks = midranks(pooled, &tie_term);
  const double n = static_cast<double>(pooled.size());

  KruskalWallisResult result;
  result.df = groups.size() - 1;
  result.critical_value = chi_square_critical_005(result.df);
  const double correction = 1.0 - tie_term / (n * n * n - n);
  if (correction <= 0.0) return result;  // every observation identical

  double sum = 0.0;
  std::size_t offset = 0;
  for (const auto& g : groups) {
    double r = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) r += ranks[offset + i];
    sum += r * r / static_cast<double>(g.size());
    offset += g.size();
  }
  result.h = (12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction;
  result.significant = result.h > result.critical_value;
  return result;
}

ClusteringMetrics clustering_metrics(const Matrix& points, std::span<const int> labels) {
  if (points.rows() != labels.size()) throw ArgumentError("points and labels differ in length");
  std::map<int, std::size_t> cluster_of;
  for (const int l : labels) cluster_of.try_emplace(l, 0);
  if (cluster_of.size() < 2) throw MetricError("clustering metrics need at least 2 distinct labels");
  std::size_t next = 0;
  for (auto& [label, index] : cluster_of) index = next++;

  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  const std::size_t k = cluster_of.size();
  const auto& kern = kernels::active();
  std::vector<std::size_t> member(n);
  for (std::size_t i = 0; i < n; ++i) member[i] = cluster_of.at(labels[i]);

  Matrix centroids(k, d);
  std::vector<double> sizes(k, 0.0);
  std::vector<double> overall(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = points.row(i);
    auto c = centroids.row(member[i]);
    for (std::size_t j = 0; j < d; ++j) {
      c[j] += p[j];
      overall[j] += p[j];
    }
    sizes[member[i]] += 1.0;
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (double& v : centroids.row(c)) v /= sizes[c];
  }
  for (double& v : overall) v /= static_cast<double>(n);

  ClusteringMetrics m;

  // Calinski-Harabasz
  double between = 0.0, within = 0.0;
  std::vector<double> scatter(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    between += sizes[c] * kern.squared_distance(centroids.row(c).data(), overall.data(), d);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double sq = kern.squared_distance(points.row(i).data(), centroids.row(member[i]).data(), d);
    within += sq;
    scatter[member[i]] += std::sqrt(sq);
  }
  const double nk = static_cast<double>(n) - static_cast<double>(k);
  m.calinski_harabasz = within == 0.0 ? 1.0 : (between / static_cast<double>(k - 1)) / (within / nk);

  // Davies-Bouldin
  for (std::size_t c = 0; c < k; ++c) scatter[c] /= sizes[c];
  double db = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    double worst = 0.0;
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) continue;
      const double dist = std::sqrt(kern.squared_distance(centroids.row(a).data(), centroids.row(b).data(), d));
      if (dist > 0.0) worst = std::max(worst, (scatter[a] + scatter[b]) / dist);
    }
    db += worst;
  }
  m.davies_bouldin = db / static_cast<double>(k);

  // Silhouette
  double total = 0.0;
  std::vector<double> sums(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      sums[member[j]] += std::sqrt(kern.squared_distance(points.row(i).data(), points.row(j).data(), d));
    }
    const std::size_t own = member[i];
    if (sizes[own] < 2.0) continue;  // singleton: s(i) = 0
    const double a = sums[own] / (sizes[own] - 1.0);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own) b = std::min(b, sums[c] / sizes[c]);
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  m.silhouette = total / static_cast<double>(n);
  return m;
}

std::vector<double> normalize_min_max(std::span<const double> values, bool invert) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (range <= 0.0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = invert ? (*hi - values[i]) / range : (values[i] - *lo) / range;
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw MetricError("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace dualkge
